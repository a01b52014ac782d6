//! Enclosing intervals for the spectra of the one-dimensional discretized
//! operators.
//!
//! A second-order pencil with truncation `n` corresponds to characteristic
//! polynomials built from degree-`n + 1` residuals, so the solver calls the
//! closed-form bounds with argument `n + 1`; fourth order uses `n + 3`.

use libm::lgamma;
use serde::Serialize;

use crate::banded::{BandedLu, BandedMatrix};
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SpectralInterval {
    pub lo: f64,
    pub hi: f64,
    /// The interval describes eigenvalues of the inverse operator.
    pub reciprocal: bool,
}

impl SpectralInterval {
    pub fn new(lo: f64, hi: f64) -> Result<Self> {
        if !(lo.is_finite() && hi.is_finite()) || lo > hi {
            return Err(Error::InvalidArgument(format!("bad interval [{lo}, {hi}]")));
        }
        Ok(SpectralInterval { lo, hi, reciprocal: false })
    }

    pub fn contains(&self, v: f64) -> bool {
        self.lo <= v && v <= self.hi
    }

    pub fn excludes_zero(&self) -> bool {
        self.lo * self.hi > 0.0
    }

    pub fn max_abs(&self) -> f64 {
        self.lo.abs().max(self.hi.abs())
    }

    /// Negated interval `[-hi, -lo]`.
    pub fn negated(&self) -> Self {
        SpectralInterval { lo: -self.hi, hi: -self.lo, reciprocal: self.reciprocal }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Parity {
    Even,
    Odd,
}

/// Coefficients of a characteristic polynomial in descending powers of
/// `lambda`, stored as signed logarithms.
#[derive(Clone, Debug, PartialEq)]
pub struct CharCoeffs {
    pub log_abs: Vec<f64>,
    pub signs: Vec<f64>,
    pub parity: Parity,
    pub n: usize,
}

impl CharCoeffs {
    pub fn degree(&self) -> usize {
        self.log_abs.len().saturating_sub(1)
    }

    pub fn values(&self) -> Result<Vec<f64>> {
        self.log_abs
            .iter()
            .zip(&self.signs)
            .map(|(l, s)| {
                let v = s * l.exp();
                if v.is_finite() {
                    Ok(v)
                } else {
                    Err(Error::Overflow { n: self.n })
                }
            })
            .collect()
    }

    /// Ratio `c_i / c_j` without leaving log space.
    fn ratio(&self, i: usize, j: usize) -> f64 {
        if self.signs[i] == 0.0 {
            return 0.0;
        }
        self.signs[i] * self.signs[j] * (self.log_abs[i] - self.log_abs[j]).exp()
    }

    fn reversed(&self) -> CharCoeffs {
        let mut r = self.clone();
        r.log_abs.reverse();
        r.signs.reverse();
        r
    }
}

fn ln_fact(k: f64) -> f64 {
    lgamma(k + 1.0)
}

/// `a_k` (odd residual `C^(2)_{n-1}`) and `b_k` (even residual `C^(2)_n`).
pub fn char_coeffs_dirichlet2(n: usize) -> Result<(CharCoeffs, CharCoeffs)> {
    if n < 4 || n % 2 != 0 {
        return Err(Error::InvalidArgument(format!("n must be even and >= 4, got {n}")));
    }
    let nf = n as f64;
    let ln2 = std::f64::consts::LN_2;
    let a: Vec<f64> = (0..n / 2)
        .map(|k| {
            let k = k as f64;
            2.0 * k * ln2 + lgamma(nf + 2.0 * k + 3.0) + ln_fact(2.0 * k + 1.0)
                - lgamma(4.0 * k + 4.0)
                - ln_fact(nf - 2.0 * k - 1.0)
        })
        .collect();
    let b: Vec<f64> = (0..=n / 2)
        .map(|k| {
            let k = k as f64;
            2.0 * k * ln2 + lgamma(nf + 2.0 * k + 4.0) + ln_fact(2.0 * k + 1.0)
                - lgamma(4.0 * k + 4.0)
                - ln_fact(nf - 2.0 * k)
        })
        .collect();
    if a.iter().chain(&b).any(|v| !v.is_finite()) {
        return Err(Error::Overflow { n });
    }
    let mk = |l: Vec<f64>, parity| CharCoeffs {
        signs: vec![1.0; l.len()],
        log_abs: l,
        parity,
        n,
    };
    Ok((mk(a, Parity::Odd), mk(b, Parity::Even)))
}

fn newton_upper(c: &CharCoeffs) -> Result<f64> {
    let m = c.degree();
    if m == 0 {
        return Err(Error::InvalidArgument("polynomial has no roots".into()));
    }
    let r1 = c.ratio(1, 0);
    let r2 = if m >= 2 { c.ratio(2, 0) } else { 0.0 };
    let disc = r1 * r1 - 2.0 * r2;
    if disc < 0.0 || !disc.is_finite() {
        return Err(Error::ComplexSpectrum { discriminant: disc });
    }
    Ok(disc.sqrt())
}

/// Newton bounds on the root magnitudes: `(upper, lower)`.
pub fn newton_bound(c: &CharCoeffs) -> Result<(f64, f64)> {
    Ok((newton_upper(c)?, newton_lower(c)?))
}

/// Lower Newton bound alone; needs only the smallest roots to be real.
pub fn newton_lower(c: &CharCoeffs) -> Result<f64> {
    Ok(1.0 / newton_upper(&c.reversed())?)
}

/// Fujiwara bound on the root moduli, valid for complex roots too.
pub fn modulus_bound(c: &CharCoeffs) -> Result<f64> {
    let m = c.degree();
    if m == 0 || c.signs[0] == 0.0 {
        return Err(Error::InvalidArgument("polynomial has no roots".into()));
    }
    let mut best = f64::NEG_INFINITY;
    for k in 1..=m {
        if c.signs[k] == 0.0 {
            continue;
        }
        let mut l = c.log_abs[k] - c.log_abs[0];
        if k == m {
            l -= std::f64::consts::LN_2;
        }
        best = best.max(l / k as f64);
    }
    Ok(2.0 * best.exp())
}

/// Closed-form Dirichlet second-order bounds at polynomial degree `n`.
pub fn dirichlet2_bounds(n: usize) -> SpectralInterval {
    let n = n as f64;
    let lo = -(n * (n - 1.0) * (n + 5.0) * (n + 4.0)
        * (29.0 * n.powi(4) + 232.0 * n.powi(3) + 2279.0 * n * n + 7260.0 * n - 17640.0)
        / 121275.0)
        .sqrt();
    let hi = -(48.0 * (n.powi(3) + 2.0 * n * n + n)
        / (8.0 * n.powi(3) + 16.0 * n * n + 8.0 * n - 3.0))
        .sqrt();
    SpectralInterval { lo, hi, reciprocal: false }
}

/// Bounds for the Dirichlet second-order pencil of truncation `n`.
pub fn dirichlet2_interval(n: usize) -> SpectralInterval {
    dirichlet2_bounds(n + 1)
}

/// `log |(L^k C^(q)_m)^(r)(1)|` with `L = d^q/dx^q`, or `None` when zero.
pub fn log_lk_deriv_at_one(q: usize, k: usize, m: usize, r: usize) -> Option<f64> {
    let shift = q * k + r;
    if shift > m {
        return None;
    }
    let qf = q as f64;
    let mp = (m - shift) as f64;
    let lam = qf + shift as f64;
    // 2^{qk+r} (q)_{qk+r} binom(m' + 2 lam - 1, m')
    let poch = lgamma(qf + shift as f64) - lgamma(qf);
    let binom = lgamma(mp + 2.0 * lam) - lgamma(mp + 1.0) - lgamma(2.0 * lam);
    Some(shift as f64 * std::f64::consts::LN_2 + poch + binom)
}

fn log_add(terms: &[(f64, f64)]) -> (f64, f64) {
    let live: Vec<&(f64, f64)> = terms.iter().filter(|t| t.1 != 0.0).collect();
    if live.is_empty() {
        return (f64::NEG_INFINITY, 0.0);
    }
    let mx = live.iter().fold(f64::NEG_INFINITY, |m, t| m.max(t.0));
    let s: f64 = live.iter().map(|t| t.1 * (t.0 - mx).exp()).sum();
    if s == 0.0 {
        return (f64::NEG_INFINITY, 0.0);
    }
    (mx + s.abs().ln(), s.signum())
}

/// Characteristic polynomial for one parity class of an order-`q` problem
/// whose boundary conditions at `x = 1` are the derivative orders
/// `derivs` (one per residual degree in `degrees`).
///
/// Supports one or two conditions per class.
pub fn char_coeffs_generic(
    q: usize,
    degrees: &[usize],
    derivs: &[usize],
    parity: Parity,
    n: usize,
) -> Result<CharCoeffs> {
    if degrees.len() != derivs.len() || !(1..=2).contains(&degrees.len()) {
        return Err(Error::InvalidArgument(
            "one or two residuals per parity class are supported".into(),
        ));
    }
    let kmax = degrees.iter().max().copied().unwrap_or(0) / q + 1;
    // entry (r, m) as a polynomial in nu = 1/lambda
    let series = |r: usize, m: usize| -> Vec<(f64, f64)> {
        (0..=kmax)
            .map(|k| match log_lk_deriv_at_one(q, k, m, r) {
                Some(l) => (l, 1.0),
                None => (f64::NEG_INFINITY, 0.0),
            })
            .collect()
    };
    let coeffs: Vec<(f64, f64)> = if degrees.len() == 1 {
        series(derivs[0], degrees[0])
    } else {
        let (m1, m2) = (degrees[0], degrees[1]);
        let (r1, r2) = (derivs[0], derivs[1]);
        let e11 = series(r1, m1);
        let e12 = series(r1, m2);
        let e21 = series(r2, m1);
        let e22 = series(r2, m2);
        (0..=2 * kmax)
            .map(|j| {
                let mut terms = Vec::new();
                for k1 in 0..=j.min(kmax) {
                    let k2 = j - k1;
                    if k2 > kmax {
                        continue;
                    }
                    terms.push((e11[k1].0 + e22[k2].0, e11[k1].1 * e22[k2].1));
                    terms.push((e12[k1].0 + e21[k2].0, -e12[k1].1 * e21[k2].1));
                }
                log_add(&terms)
            })
            .collect()
    };
    // descending powers of lambda are ascending powers of nu; drop zero
    // high-order terms in nu
    let mut len = coeffs.len();
    while len > 0 && coeffs[len - 1].1 == 0.0 {
        len -= 1;
    }
    if len < 2 || coeffs[0].1 == 0.0 {
        return Err(Error::InvalidArgument("degenerate characteristic polynomial".into()));
    }
    Ok(CharCoeffs {
        log_abs: coeffs[..len].iter().map(|c| c.0).collect(),
        signs: coeffs[..len].iter().map(|c| c.1).collect(),
        parity,
        n,
    })
}

/// Interval for the real parts of the clamped fourth-order pencil of
/// truncation `n`. The low end is real and takes the Newton bound; the top
/// of the spectrum holds complex pairs, so the high end bounds moduli.
pub fn clamped4_interval(n: usize) -> Result<SpectralInterval> {
    if n < 5 {
        return Err(Error::InvalidArgument(format!("truncation {n} too small")));
    }
    let np = n + 3;
    let classes = [
        (vec![np - 2, np], if np % 2 == 0 { Parity::Even } else { Parity::Odd }),
        (vec![np - 3, np - 1], if np % 2 == 0 { Parity::Odd } else { Parity::Even }),
    ];
    let mut lo = f64::INFINITY;
    let mut hi = 0.0_f64;
    for (degrees, parity) in classes {
        let c = char_coeffs_generic(4, &degrees, &[0, 1], parity, np)?;
        hi = hi.max(modulus_bound(&c)?);
        lo = lo.min(newton_lower(&c)?);
    }
    SpectralInterval::new(lo, hi)
}

/// `[1/hi, 1/lo]`, toggling the reciprocal flag.
pub fn reciprocal_interval(s: &SpectralInterval) -> Result<SpectralInterval> {
    if !s.excludes_zero() {
        return Err(Error::IndefiniteInterval { lo: s.lo, hi: s.hi });
    }
    Ok(SpectralInterval {
        lo: 1.0 / s.hi,
        hi: 1.0 / s.lo,
        reciprocal: !s.reciprocal,
    })
}

/// Interval for `u'' - rho u` given the interval of `u''` and the range of
/// `rho`.
pub fn shifted_interval(s: &SpectralInterval, rho_range: (f64, f64)) -> Result<SpectralInterval> {
    let (rlo, rhi) = rho_range;
    if rlo > rhi {
        return Err(Error::InvalidArgument(format!("bad range ({rlo}, {rhi})")));
    }
    let out = SpectralInterval {
        lo: s.lo - rhi,
        hi: s.hi - rlo,
        reciprocal: s.reciprocal,
    };
    if !out.excludes_zero() {
        return Err(Error::IndefiniteInterval { lo: out.lo, hi: out.hi });
    }
    Ok(out)
}

const SAFETY: f64 = 1.1;

/// Dominant eigenvalue of `b^{-1} a` by power iteration, refined with
/// shifted inverse iteration.
fn dominant_eig(a: &BandedMatrix, b: &BandedMatrix, b_lu: &BandedLu, iters: usize) -> Result<f64> {
    let n = a.nrows();
    let mut x: Vec<f64> = (0..n).map(|i| if i % 2 == 0 { 1.0 } else { -1.0 }).collect();
    let norm = |v: &[f64]| v.iter().map(|t| t * t).sum::<f64>().sqrt();
    let mut est = 0.0;
    let mut prev = f64::NAN;
    let mut coarse = false;
    let mut used = 0;
    for it in 0..iters {
        used = it + 1;
        let mut y = a.matvec(&x);
        b_lu.solve_vec(&mut y);
        let xx: f64 = x.iter().map(|t| t * t).sum();
        est = x.iter().zip(&y).map(|(p, q)| p * q).sum::<f64>() / xx;
        let ny = norm(&y);
        if ny == 0.0 || !ny.is_finite() {
            return Err(Error::NoConvergence { iters: it, what: "power iteration collapsed".into() });
        }
        x = y.iter().map(|t| t / ny).collect();
        if (est - prev).abs() <= 1e-4 * est.abs() {
            coarse = true;
            break;
        }
        prev = est;
    }
    if !coarse {
        return Err(Error::NoConvergence {
            iters,
            what: "dominant eigenvalue (complex pair suspected); increase iters".into(),
        });
    }
    // refine: (a - sigma b)^{-1} b, largest eigenvalue 1/(lambda - sigma)
    let sigma = est * (1.0 + 1e-6);
    let shifted = a.add_scaled(b, -sigma)?;
    let lu = BandedLu::new(&shifted)?;
    let mut lam = est;
    for _ in used..iters.max(used + 50) {
        let mut y = b.matvec(&x);
        lu.solve_vec(&mut y);
        let xx: f64 = x.iter().map(|t| t * t).sum();
        let theta = x.iter().zip(&y).map(|(p, q)| p * q).sum::<f64>() / xx;
        let ny = norm(&y);
        x = y.iter().map(|t| t / ny).collect();
        let next = sigma + 1.0 / theta;
        if (next - lam).abs() <= 1e-13 * next.abs() {
            return Ok(next);
        }
        lam = next;
    }
    Err(Error::NoConvergence { iters, what: "shifted inverse iteration".into() })
}

/// Extreme eigenvalues of `a2^{-1} a1` (that is, `a1 v = lambda a2 v`),
/// inflated by a safety factor of 1.1 on both ends.
pub fn empirical_interval(a1: &BandedMatrix, a2: &BandedMatrix, iters: usize) -> Result<SpectralInterval> {
    empirical_interval_with(a1, a2, iters, SAFETY)
}

pub fn empirical_interval_with(
    a1: &BandedMatrix,
    a2: &BandedMatrix,
    iters: usize,
    safety: f64,
) -> Result<SpectralInterval> {
    let lu2 = BandedLu::new(a2)?;
    let big = dominant_eig(a1, a2, &lu2, iters)?;
    let lu1 = BandedLu::new(a1)?;
    let small = 1.0 / dominant_eig(a2, a1, &lu1, iters)?;
    if big * small <= 0.0 {
        return Err(Error::IndefiniteInterval { lo: big.min(small), hi: big.max(small) });
    }
    let (lo, hi) = if big < 0.0 {
        (big * safety, small / safety)
    } else {
        (small / safety, big * safety)
    };
    SpectralInterval::new(lo, hi)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::recomb::{build_transform, ClosedForm, ScalingRule};
    use crate::usops::{conv_chain_rect, diff_op_rect};
    use nalgebra::DMatrix;

    /// Operator and conversion pencil for a closed-form transform.
    fn pencil(kind: ClosedForm, order: usize, n: usize) -> (BandedMatrix, BandedMatrix) {
        let t = build_transform(&kind.constraints(), n, ScalingRule::DiagonalUnity).unwrap();
        let rows = t.matrix.nrows();
        let d = diff_op_rect(order, n, rows).unwrap().matmul(&t.matrix).unwrap();
        let s = conv_chain_rect(order, n, rows).unwrap().matmul(&t.matrix).unwrap();
        (d, s)
    }

    /// All generalized eigenvalues via a dense nonsymmetric eigensolver.
    fn dense_eigs(a: &BandedMatrix, b: &BandedMatrix) -> Vec<nalgebra::Complex<f64>> {
        let n = a.nrows();
        let ad = a.to_dense();
        let bd = b.to_dense();
        let am = DMatrix::from_fn(n, n, |i, j| ad[[i, j]]);
        let bm = DMatrix::from_fn(n, n, |i, j| bd[[i, j]]);
        let m = bm.lu().solve(&am).unwrap();
        m.complex_eigenvalues().iter().copied().collect()
    }

    fn useigbound1(n: f64) -> (f64, f64) {
        let lo = -((n - 1.0) * (n - 2.0) * (n + 4.0) * (n + 3.0)
            * (29.0 * n.powi(4) + 116.0 * n.powi(3) + 1757.0 * n * n + 3282.0 * n - 22824.0)
            / 121275.0)
            .sqrt();
        let hi = -(720.0 * (n.powi(3) - n * n) / (8.0 * n.powi(3) - 8.0 * n * n - 45.0)).sqrt();
        (lo, hi)
    }

    #[test]
    fn ab_coefficients_by_hand() {
        let (a, b) = char_coeffs_dirichlet2(6).unwrap();
        assert!((a.values().unwrap()[0] - 56.0).abs() < 1e-11);
        assert!((b.values().unwrap()[0] - 84.0).abs() < 1e-11);
        for n in (4..=64).step_by(2) {
            let (a, _) = char_coeffs_dirichlet2(n).unwrap();
            let v = a.values().unwrap();
            assert!(v[1] / v[0] > 0.0 && (v[1] / v[0]).is_finite());
        }
        assert!(char_coeffs_dirichlet2(7).is_err());
        // log space survives where the values themselves overflow
        let (a, _) = char_coeffs_dirichlet2(400).unwrap();
        assert!(a.values().is_err());
        assert!(newton_bound(&a).is_ok());
    }

    #[test]
    fn generic_pipeline_reproduces_closed_form() {
        for n in [6usize, 10, 40] {
            let (a, b) = char_coeffs_dirichlet2(n).unwrap();
            let ga = char_coeffs_generic(2, &[n - 1], &[0], Parity::Odd, n).unwrap();
            let gb = char_coeffs_generic(2, &[n], &[0], Parity::Even, n).unwrap();
            for (x, y) in a.log_abs.iter().zip(&ga.log_abs) {
                assert!((x - y).abs() < 1e-10);
            }
            assert_eq!(a.log_abs.len(), ga.log_abs.len());
            for (x, y) in b.log_abs.iter().zip(&gb.log_abs) {
                assert!((x - y).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn newton_simple_quadratic() {
        let c = CharCoeffs {
            log_abs: vec![0.0, 3f64.ln(), 2f64.ln()],
            signs: vec![1.0; 3],
            parity: Parity::Even,
            n: 2,
        };
        let (hi, lo) = newton_bound(&c).unwrap();
        assert!((hi - 5f64.sqrt()).abs() < 1e-15);
        assert!((lo - 2.0 / 5f64.sqrt()).abs() < 1e-15);
        let complex = CharCoeffs {
            log_abs: vec![0.0, 0.0, 5f64.ln()],
            signs: vec![1.0; 3],
            parity: Parity::Even,
            n: 2,
        };
        assert!(matches!(newton_bound(&complex), Err(Error::ComplexSpectrum { .. })));
    }

    /// Newton bounds enclose the characteristic roots, found as eigenvalues
    /// of the companion matrix.
    #[test]
    fn newton_encloses_companion_roots() {
        let (a, b) = char_coeffs_dirichlet2(8).unwrap();
        for c in [a, b] {
            let v = c.values().unwrap();
            let m = v.len() - 1;
            let comp = DMatrix::from_fn(m, m, |i, j| {
                if i == 0 {
                    -v[j + 1] / v[0]
                } else if i == j + 1 {
                    1.0
                } else {
                    0.0
                }
            });
            let (hi, lo) = newton_bound(&c).unwrap();
            for r in comp.complex_eigenvalues().iter() {
                assert!(r.im.abs() < 1e-9);
                assert!(r.re < 0.0);
                assert!(r.re.abs() <= hi * (1.0 + 1e-12) && r.re.abs() >= lo * (1.0 - 1e-12));
            }
        }
    }

    #[test]
    fn closed_form_equals_newton_on_b() {
        for n in (4..=200).step_by(2) {
            let (a, b) = char_coeffs_dirichlet2(n).unwrap();
            let s = dirichlet2_bounds(n);
            let (hi, lo) = newton_bound(&b).unwrap();
            assert!((s.lo + hi).abs() <= 1e-10 * hi, "n={n}");
            assert!((s.hi + lo).abs() <= 1e-10 * lo, "n={n}");
            if n >= 8 {
                let (ha, la) = newton_bound(&a).unwrap();
                let (l1, h1) = useigbound1(n as f64);
                assert!((l1 + ha).abs() <= 1e-9 * ha, "n={n}");
                assert!((h1 + la).abs() <= 1e-9 * la, "n={n}");
                // the odd-residual range sits inside the even-residual range
                assert!(s.lo <= l1 && h1 <= s.hi);
            }
        }
    }

    #[test]
    fn upper_end_limit() {
        let s = dirichlet2_bounds(1_000_000);
        assert!((s.hi + 6f64.sqrt()).abs() < 1e-5);
        assert!(s.hi > -std::f64::consts::PI.powi(2) / 4.0);
    }

    #[test]
    fn interval_encloses_dense_spectrum() {
        for n in [8usize, 16, 32, 64] {
            let (d, s) = pencil(ClosedForm::Dirichlet, 2, n);
            let iv = dirichlet2_interval(n);
            let eigs = dense_eigs(&d, &s);
            assert_eq!(eigs.len(), n);
            for e in &eigs {
                assert!(e.im.abs() < 1e-8 * e.re.abs());
                assert!(iv.contains(e.re), "n={n}: {} outside [{}, {}]", e.re, iv.lo, iv.hi);
                // reciprocal interval encloses reciprocal eigenvalues
                let r = reciprocal_interval(&iv).unwrap();
                assert!(r.contains(1.0 / e.re));
            }
        }
    }

    #[test]
    fn intervals_nest_with_n() {
        let small = dirichlet2_interval(16);
        for n in [32usize, 64] {
            let (d, s) = pencil(ClosedForm::Dirichlet, 2, n);
            let mut eigs: Vec<f64> = dense_eigs(&d, &s).iter().map(|e| e.re).collect();
            eigs.sort_by(|a, b| b.partial_cmp(a).unwrap());
            // the smallest-magnitude eigenvalues converge and stay enclosed
            for e in &eigs[..16] {
                assert!(small.contains(*e) || *e < small.lo);
                assert!(*e <= small.hi);
            }
        }
    }

    #[test]
    fn reciprocal_examples() {
        let r = reciprocal_interval(&SpectralInterval::new(-10.0, -2.0).unwrap()).unwrap();
        assert_eq!((r.lo, r.hi, r.reciprocal), (-0.5, -0.1, true));
        let r = reciprocal_interval(&SpectralInterval::new(2.0, 10.0).unwrap()).unwrap();
        assert_eq!((r.lo, r.hi), (0.1, 0.5));
        let back = reciprocal_interval(&r).unwrap();
        assert_eq!((back.lo, back.hi, back.reciprocal), (2.0, 10.0, false));
        assert!(reciprocal_interval(&SpectralInterval::new(-1.0, 1.0).unwrap()).is_err());
    }

    #[test]
    fn shifted_examples() {
        let s = SpectralInterval::new(-100.0, -2.5).unwrap();
        let t = shifted_interval(&s, (0.0, 1.0)).unwrap();
        assert_eq!((t.lo, t.hi), (-101.0, -2.5));
        assert_eq!(shifted_interval(&s, (0.0, 0.0)).unwrap(), s);
        // screened with constant rho = -w^2/2 moves toward zero
        let t = shifted_interval(&s, (-2.0, -2.0)).unwrap();
        assert_eq!((t.lo, t.hi), (-98.0, -0.5));
        assert!(shifted_interval(&s, (-3.0, -3.0)).is_err());
    }

    #[test]
    fn empirical_examples() {
        let id = BandedMatrix::identity(10);
        let iv = empirical_interval(&id, &id, 100).unwrap();
        assert!((iv.lo - 1.0 / 1.1).abs() < 1e-12 && (iv.hi - 1.1).abs() < 1e-12);

        let (d, s) = pencil(ClosedForm::Dirichlet, 2, 32);
        let emp = empirical_interval_with(&d, &s, 5000, 1.0).unwrap();
        let closed = dirichlet2_interval(32);
        assert!(closed.lo <= emp.lo && emp.hi <= closed.hi);
        let eigs = dense_eigs(&d, &s);
        let mx = eigs.iter().map(|e| e.re).fold(f64::INFINITY, f64::min);
        let mn = eigs.iter().map(|e| e.re).fold(f64::NEG_INFINITY, f64::max);
        assert!((emp.lo - mx).abs() < 1e-8 * mx.abs());
        assert!((emp.hi - mn).abs() < 1e-8 * mn.abs());

        let (d, s) = pencil(ClosedForm::NeumannRight, 2, 32);
        let iv = empirical_interval(&d, &s, 5000).unwrap();
        assert!(iv.hi < 0.0 && iv.lo < iv.hi);
        for e in dense_eigs(&d, &s) {
            assert!(iv.contains(e.re));
        }
    }

    #[test]
    fn clamped_bounds_enclose_spectrum() {
        for n in [8usize, 16, 32, 64, 128] {
            let (d, s) = pencil(ClosedForm::Clamped, 4, n);
            let iv = clamped4_interval(n).unwrap();
            let eigs = dense_eigs(&d, &s);
            for e in &eigs {
                assert!(e.norm() <= iv.hi, "n={n}: |{e}| > {}", iv.hi);
                assert!(iv.contains(e.re), "n={n}: {} outside [{}, {}]", e.re, iv.lo, iv.hi);
            }
            // the bottom quarter is real
            let mut re: Vec<_> = eigs.iter().collect();
            re.sort_by(|a, b| a.re.partial_cmp(&b.re).unwrap());
            for e in &re[..n / 4] {
                assert!(e.im.abs() <= 1e-8 * e.re, "n={n}: {e}");
            }
            match empirical_interval(&d, &s, 2000) {
                Ok(emp) => assert!(emp.lo > 0.0),
                Err(e) => assert!(matches!(e, Error::NoConvergence { .. })),
            }
        }
    }
}
