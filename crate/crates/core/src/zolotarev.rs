//! Optimal ADI shifts for a pair of disjoint real intervals.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ShiftOrder {
    /// Decreasing `|p_j|`: the reciprocals `1/p_j`, which live on the scale
    /// of the operator eigenvalues, grow in magnitude.
    Ascending,
    Descending,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ShiftSchedule {
    /// Shifts lying in `[c, d]`.
    pub p: Vec<f64>,
    /// Shifts lying in `[a, b]`.
    pub q: Vec<f64>,
    pub intervals: ((f64, f64), (f64, f64)),
    pub gamma: f64,
    pub alpha: f64,
    pub beta: f64,
    pub order: ShiftOrder,
}

impl ShiftSchedule {
    pub fn len(&self) -> usize {
        self.p.len()
    }

    pub fn is_empty(&self) -> bool {
        self.p.is_empty()
    }

    /// Same shifts, opposite order.
    pub fn reversed(&self) -> ShiftSchedule {
        let mut s = self.clone();
        s.p.reverse();
        s.q.reverse();
        s.order = match self.order {
            ShiftOrder::Ascending => ShiftOrder::Descending,
            ShiftOrder::Descending => ShiftOrder::Ascending,
        };
        s
    }
}

fn check_intervals(a: f64, b: f64, c: f64, d: f64) -> Result<()> {
    if ![a, b, c, d].iter().all(|v| v.is_finite()) {
        return Err(Error::InvalidArgument("non-finite interval end".into()));
    }
    if a > b || c > d {
        return Err(Error::InvalidArgument(format!("reversed interval [{a}, {b}] or [{c}, {d}]")));
    }
    if a.max(c) <= b.min(d) {
        return Err(Error::OverlappingIntervals { a, b, c, d });
    }
    Ok(())
}

pub fn cross_ratio_gamma(a: f64, b: f64, c: f64, d: f64) -> Result<f64> {
    check_intervals(a, b, c, d)?;
    Ok((c - a).abs() * (d - b).abs() / ((c - b).abs() * (d - a).abs()))
}

/// `(alpha, beta)` with `beta = sqrt(1 - 1/alpha^2)` the elliptic modulus.
pub fn elliptic_params(gamma: f64) -> Result<(f64, f64)> {
    if !(gamma > 1.0) || !gamma.is_finite() {
        return Err(Error::InvalidArgument(format!("cross-ratio must exceed 1, got {gamma}")));
    }
    let alpha = -1.0 + 2.0 * gamma + 2.0 * (gamma * gamma - gamma).sqrt();
    let beta = (1.0 - 1.0 / (alpha * alpha)).sqrt();
    Ok((alpha, beta))
}

fn check_modulus(k: f64) -> Result<()> {
    if !(0.0..1.0).contains(&k) {
        return Err(Error::InvalidArgument(format!("modulus must lie in [0, 1), got {k}")));
    }
    Ok(())
}

fn complementary(k: f64) -> f64 {
    ((1.0 - k) * (1.0 + k)).sqrt()
}

/// Complete elliptic integral of the first kind by the AGM.
pub fn ellip_k(k: f64) -> Result<f64> {
    check_modulus(k)?;
    Ok(ellip_k_comp(complementary(k)))
}

/// `K` from the complementary modulus, accurate when `k' -> 0`.
fn ellip_k_comp(kp: f64) -> f64 {
    let (mut a, mut b) = (1.0_f64, kp);
    for _ in 0..64 {
        if (a - b).abs() <= 1e-16 * a {
            break;
        }
        let an = 0.5 * (a + b);
        b = (a * b).sqrt();
        a = an;
    }
    PI / (2.0 * a)
}

/// Jacobi `dn(u, k)` by descending Landen (AGM with phase recovery).
pub fn jacobi_dn(u: f64, k: f64) -> Result<f64> {
    check_modulus(k)?;
    Ok(dn_comp(u, k, complementary(k)))
}

fn dn_comp(u: f64, k: f64, kp: f64) -> f64 {
    if k == 0.0 || u == 0.0 {
        return 1.0;
    }
    let big_k = ellip_k_comp(kp);
    // dn is even with period 2K; reflect into [0, K/2]
    let mut v = u.abs() % (2.0 * big_k);
    if v > big_k {
        v = 2.0 * big_k - v;
    }
    if v > 0.5 * big_k {
        return kp / dn_landen(big_k - v, k, kp);
    }
    dn_landen(v, k, kp)
}

fn dn_landen(u: f64, k: f64, kp: f64) -> f64 {
    let mut a = vec![1.0_f64];
    let mut c = vec![k];
    let mut b = kp;
    while c.len() < 40 && c.last().copied().unwrap_or(0.0).abs() > 1e-16 * a.last().copied().unwrap_or(1.0) {
        let an = *a.last().unwrap();
        a.push(0.5 * (an + b));
        c.push(0.5 * (an - b));
        b = (an * b).sqrt();
    }
    let n = a.len() - 1;
    let mut phi = 2f64.powi(n as i32) * a[n] * u;
    let mut prev = phi;
    for j in (1..=n).rev() {
        prev = phi;
        phi = 0.5 * (phi + (c[j] / a[j] * phi.sin()).asin());
    }
    if n == 0 {
        return 1.0;
    }
    phi.cos() / (prev - phi).cos()
}

/// Möbius map `z -> (m11 z + m12) / (m21 z + m22)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MobiusMap {
    pub m11: f64,
    pub m12: f64,
    pub m21: f64,
    pub m22: f64,
}

impl MobiusMap {
    pub fn apply(&self, z: f64) -> f64 {
        (self.m11 * z + self.m12) / (self.m21 * z + self.m22)
    }

    /// Map sending `z1, z2, z3` to `0, 1, inf`.
    fn normalizing(z1: f64, z2: f64, z3: f64) -> MobiusMap {
        MobiusMap {
            m11: z2 - z3,
            m12: -z1 * (z2 - z3),
            m21: z2 - z1,
            m22: -z3 * (z2 - z1),
        }
    }

    fn inverse(&self) -> MobiusMap {
        MobiusMap { m11: self.m22, m12: -self.m12, m21: -self.m21, m22: self.m11 }
    }

    fn compose(&self, inner: &MobiusMap) -> MobiusMap {
        MobiusMap {
            m11: self.m11 * inner.m11 + self.m12 * inner.m21,
            m12: self.m11 * inner.m12 + self.m12 * inner.m22,
            m21: self.m21 * inner.m11 + self.m22 * inner.m21,
            m22: self.m21 * inner.m12 + self.m22 * inner.m22,
        }
    }
}

/// The map sending `-alpha, -1, 1, alpha` to `a, b, c, d`.
pub fn mobius_map(alpha: f64, a: f64, b: f64, c: f64, d: f64) -> Result<MobiusMap> {
    check_intervals(a, b, c, d)?;
    if a == b || c == d {
        return Err(Error::InvalidArgument("degenerate interval".into()));
    }
    let from = MobiusMap::normalizing(-alpha, -1.0, 1.0);
    let to = MobiusMap::normalizing(a, b, c);
    let m = to.inverse().compose(&from);
    let got = m.apply(alpha);
    let scale = [a, b, c, d].iter().fold(0.0_f64, |s, v| s.max(v.abs()));
    if !((got - d).abs() <= 1e-10 * scale) {
        return Err(Error::InconsistentMobius { got, expected: d });
    }
    Ok(m)
}

/// Least number of shifts reaching tolerance `eps`, clamped to `[1, 300]`.
pub fn shift_count(gamma: f64, eps: f64) -> usize {
    let k = ((16.0 * gamma).ln() * (4.0 / eps).ln() / (PI * PI)).ceil();
    if k.is_nan() {
        return 1;
    }
    k.clamp(1.0, 300.0) as usize
}

pub fn zolotarev_bound(gamma: f64, k: usize) -> f64 {
    4.0 * (-(k as f64) * PI * PI / (16.0 * gamma).ln()).exp()
}

pub fn shifts(a: f64, b: f64, c: f64, d: f64, k: usize, order: ShiftOrder) -> Result<ShiftSchedule> {
    if k == 0 {
        return Err(Error::InvalidArgument("at least one shift is required".into()));
    }
    let gamma = cross_ratio_gamma(a, b, c, d)?;
    let (alpha, beta) = elliptic_params(gamma)?;
    let m = mobius_map(alpha, a, b, c, d)?;
    let kp = 1.0 / alpha;
    let big_k = ellip_k_comp(kp);
    let mut p = Vec::with_capacity(k);
    let mut q = Vec::with_capacity(k);
    for j in 1..=k {
        let u = (2 * j - 1) as f64 * big_k / (2 * k) as f64;
        let w = alpha * dn_comp(u, beta, kp);
        p.push(m.apply(w));
        q.push(m.apply(-w));
    }
    if p[0].abs() < p[k - 1].abs() {
        p.reverse();
        q.reverse();
    }
    let s = ShiftSchedule {
        p,
        q,
        intervals: ((a, b), (c, d)),
        gamma,
        alpha,
        beta,
        order: ShiftOrder::Ascending,
    };
    Ok(match order {
        ShiftOrder::Ascending => s,
        ShiftOrder::Descending => s.reversed(),
    })
}
