//! Slow dense reference implementations for cross-checking.

use ndarray::Array2;

use crate::adi::SylvesterSystem;
use crate::banded::{BandedLu, BandedMatrix};
use crate::error::{Error, Result};
use crate::zolotarev::ShiftSchedule;

pub const KRON_LIMIT: usize = 64;
pub const EIG_LIMIT: usize = 512;

/// Row-major dense matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct DenseMatrix {
    pub nrows: usize,
    pub ncols: usize,
    pub entries: Vec<f64>,
}

impl DenseMatrix {
    pub fn zeros(nrows: usize, ncols: usize) -> Self {
        DenseMatrix { nrows, ncols, entries: vec![0.0; nrows * ncols] }
    }

    pub fn from_banded(b: &BandedMatrix) -> Self {
        let (nrows, ncols) = b.dim();
        let mut m = Self::zeros(nrows, ncols);
        for i in 0..nrows {
            for j in 0..ncols {
                m.entries[i * ncols + j] = b.get(i, j);
            }
        }
        m
    }

    pub fn from_array(a: &Array2<f64>) -> Self {
        let (nrows, ncols) = a.dim();
        DenseMatrix { nrows, ncols, entries: a.iter().copied().collect() }
    }

    pub fn to_array(&self) -> Array2<f64> {
        Array2::from_shape_vec((self.nrows, self.ncols), self.entries.clone())
            .expect("shape matches entries")
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.entries[i * self.ncols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.entries[i * self.ncols + j] = v;
    }

    pub fn matmul(&self, o: &DenseMatrix) -> Result<DenseMatrix> {
        if self.ncols != o.nrows {
            return Err(Error::Dimension(format!(
                "{}x{} times {}x{}",
                self.nrows, self.ncols, o.nrows, o.ncols
            )));
        }
        let mut out = Self::zeros(self.nrows, o.ncols);
        for i in 0..self.nrows {
            for k in 0..self.ncols {
                let a = self.get(i, k);
                if a == 0.0 {
                    continue;
                }
                for j in 0..o.ncols {
                    out.entries[i * o.ncols + j] += a * o.get(k, j);
                }
            }
        }
        Ok(out)
    }

    /// Leading `r x c` block.
    pub fn block(&self, r: usize, c: usize) -> DenseMatrix {
        let mut out = Self::zeros(r, c);
        for i in 0..r.min(self.nrows) {
            for j in 0..c.min(self.ncols) {
                out.set(i, j, self.get(i, j));
            }
        }
        out
    }

    /// Solve `self x = b` by LU with partial pivoting.
    pub fn solve(&self, b: &[f64]) -> Result<Vec<f64>> {
        let n = self.nrows;
        if self.ncols != n || b.len() != n {
            return Err(Error::Dimension("dense solve".into()));
        }
        let mut a = self.entries.clone();
        let mut x = b.to_vec();
        for k in 0..n {
            let (mut p, mut best) = (k, 0.0);
            for i in k..n {
                if a[i * n + k].abs() > best {
                    best = a[i * n + k].abs();
                    p = i;
                }
            }
            if best == 0.0 {
                return Err(Error::Singular { column: k });
            }
            if p != k {
                for j in 0..n {
                    a.swap(k * n + j, p * n + j);
                }
                x.swap(k, p);
            }
            for i in k + 1..n {
                let f = a[i * n + k] / a[k * n + k];
                if f == 0.0 {
                    continue;
                }
                for j in k..n {
                    a[i * n + j] -= f * a[k * n + j];
                }
                x[i] -= f * x[k];
            }
        }
        for k in (0..n).rev() {
            let mut s = x[k];
            for j in k + 1..n {
                s -= a[k * n + j] * x[j];
            }
            x[k] = s / a[k * n + k];
        }
        Ok(x)
    }
}

/// Dense `D_order`, written from the entry formula.
pub fn dense_diff(order: usize, nrows: usize, ncols: usize) -> DenseMatrix {
    let mut m = DenseMatrix::zeros(nrows, ncols);
    let fact: f64 = (1..order).map(|v| v as f64).product();
    let s = 2f64.powi(order as i32 - 1) * fact;
    for i in 0..nrows {
        if i + order < ncols {
            m.set(i, i + order, s * (order + i) as f64);
        }
    }
    m
}

/// Dense `S_l`.
pub fn dense_conv(l: usize, nrows: usize, ncols: usize) -> DenseMatrix {
    let mut m = DenseMatrix::zeros(nrows, ncols);
    for i in 0..nrows {
        let (d, u) = if l == 0 {
            (if i == 0 { 1.0 } else { 0.5 }, -0.5)
        } else {
            let lf = l as f64;
            (lf / (lf + i as f64), -lf / (lf + i as f64 + 2.0))
        };
        if i < ncols {
            m.set(i, i, d);
        }
        if i + 2 < ncols {
            m.set(i, i + 2, u);
        }
    }
    m
}

/// Dense `S_{order-1} ... S_0`, built square at `size` and then cut.
pub fn dense_conv_chain(order: usize, nrows: usize, ncols: usize) -> DenseMatrix {
    let size = nrows.max(ncols);
    let mut acc = dense_conv(0, size, size);
    for l in 1..order {
        acc = dense_conv(l, size, size).matmul(&acc).expect("square factors");
    }
    acc.block(nrows, ncols)
}

/// Solve `(B2^T (x) A1 + B1^T (x) A2) vec(X) = vec(F)` densely.
pub fn kron_solve(sys: &SylvesterSystem) -> Result<Array2<f64>> {
    let n = sys.n();
    if n > KRON_LIMIT {
        return Err(Error::TooLarge { n, limit: KRON_LIMIT });
    }
    let a1 = DenseMatrix::from_banded(&sys.a1);
    let a2 = DenseMatrix::from_banded(&sys.a2);
    let b1 = DenseMatrix::from_banded(&sys.b1);
    let b2 = DenseMatrix::from_banded(&sys.b2);
    let nn = n * n;
    let mut k = DenseMatrix::zeros(nn, nn);
    // column-major vec: index i + n j
    for j in 0..n {
        for l in 0..n {
            let (c2, c1) = (b2.get(l, j), b1.get(l, j));
            if c2 == 0.0 && c1 == 0.0 {
                continue;
            }
            for i in 0..n {
                for m in 0..n {
                    let v = c2 * a1.get(i, m) + c1 * a2.get(i, m);
                    if v != 0.0 {
                        k.entries[(i + n * j) * nn + (m + n * l)] += v;
                    }
                }
            }
        }
    }
    let f = sys.rhs.to_dense();
    let mut rhs = vec![0.0; nn];
    for j in 0..n {
        for i in 0..n {
            rhs[i + n * j] = f[[i, j]];
        }
    }
    let x = k.solve(&rhs)?;
    Ok(Array2::from_shape_fn((n, n), |(i, j)| x[i + n * j]))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Which {
    Largest,
    Smallest,
}

/// Dominant (or inverse-dominant) eigenvalue of `a2^{-1} a1` by plain
/// power iteration.
pub fn extreme_eigs(a1: &BandedMatrix, a2: &BandedMatrix, which: Which) -> Result<f64> {
    let n = a1.nrows();
    if n > EIG_LIMIT {
        return Err(Error::TooLarge { n, limit: EIG_LIMIT });
    }
    let (num, den) = match which {
        Which::Largest => (a1, a2),
        Which::Smallest => (a2, a1),
    };
    let lu = BandedLu::new(den)?;
    let mut x: Vec<f64> = (0..n).map(|i| if i % 2 == 0 { 1.0 } else { -1.0 }).collect();
    let max_iter = 500_000;
    let tol = 1e-8;
    for _ in 0..max_iter {
        let mut y = num.matvec(&x);
        lu.solve_vec(&mut y);
        let xx: f64 = x.iter().map(|v| v * v).sum();
        let theta = x.iter().zip(&y).map(|(a, b)| a * b).sum::<f64>() / xx;
        let res = y.iter().zip(&x).map(|(a, b)| (a - theta * b).powi(2)).sum::<f64>().sqrt();
        let ny = y.iter().map(|v| v * v).sum::<f64>().sqrt();
        if !(ny > 0.0) || !ny.is_finite() {
            return Err(Error::NoConvergence { iters: 0, what: "power iteration collapsed".into() });
        }
        if res <= tol * theta.abs() * xx.sqrt() {
            return Ok(match which {
                Which::Largest => theta,
                Which::Smallest => 1.0 / theta,
            });
        }
        x = y.iter().map(|v| v / ny).collect();
    }
    Err(Error::NoConvergence { iters: max_iter, what: "complex dominant pair suspected".into() })
}

/// Exact ADI error factor `prod (lam - q)(mu - p) / ((lam - p)(mu - q))`.
pub fn scalar_adi(lam: f64, mu: f64, shifts: &ShiftSchedule) -> Result<f64> {
    let mut r = 1.0;
    for (j, (&p, &q)) in shifts.p.iter().zip(&shifts.q).enumerate() {
        if lam == p || mu == q {
            return Err(Error::SingularShift {
                index: j,
                source: Box::new(Error::InvalidArgument("shift collides with sample".into())),
            });
        }
        r *= (lam - q) * (mu - p) / ((lam - p) * (mu - q));
    }
    Ok(r)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::adi::Rhs;
    use crate::spectra::dirichlet2_bounds;
    use crate::usops::{conv_chain_rect, diff_op_rect};
    use crate::zolotarev::{cross_ratio_gamma, shifts, zolotarev_bound, ShiftOrder};

    #[test]
    fn identity_system_halves() {
        let n = 5;
        let i = BandedMatrix::identity(n);
        let f = Array2::from_shape_fn((n, n), |(a, b)| (a * 7 + b) as f64 - 3.0);
        let sys = SylvesterSystem::new(i.clone(), i.clone(), i.clone(), i, Rhs::Dense(f.clone())).unwrap();
        let x = kron_solve(&sys).unwrap();
        for (a, b) in x.iter().zip(f.iter()) {
            assert!((a - b / 2.0).abs() < 1e-15);
        }
    }

    #[test]
    fn kron_refuses_large() {
        let i = BandedMatrix::identity(65);
        let sys = SylvesterSystem::new(
            i.clone(),
            i.clone(),
            i.clone(),
            i,
            Rhs::Dense(Array2::zeros((65, 65))),
        )
        .unwrap();
        assert!(matches!(kron_solve(&sys), Err(Error::TooLarge { .. })));
    }

    #[test]
    fn dense_ops_match_banded() {
        for order in 1..=4 {
            let d = DenseMatrix::from_banded(&diff_op_rect(order, 9, 13).unwrap());
            assert_eq!(d, dense_diff(order, 9, 13));
            let s = DenseMatrix::from_banded(&conv_chain_rect(order, 9, 13).unwrap());
            let o = dense_conv_chain(order, 9, 13);
            for (a, b) in s.entries.iter().zip(&o.entries) {
                assert!((a - b).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn eigs_examples() {
        let n = 10;
        let d: Vec<f64> = (1..=n).map(|v| v as f64).collect();
        let a1 = BandedMatrix::from_diag(&d);
        let id = BandedMatrix::identity(n);
        assert!((extreme_eigs(&a1, &id, Which::Largest).unwrap() - 10.0).abs() < 1e-6);
        assert!((extreme_eigs(&a1, &id, Which::Smallest).unwrap() - 1.0).abs() < 1e-6);
        assert_eq!(extreme_eigs(&id, &id, Which::Largest).unwrap(), 1.0);
        let big = BandedMatrix::identity(513);
        assert!(extreme_eigs(&big, &big, Which::Largest).is_err());
    }

    fn dirichlet_pencil(n: usize) -> (BandedMatrix, BandedMatrix) {
        use crate::recomb::{build_transform, ClosedForm, ScalingRule};
        let t = build_transform(&ClosedForm::Dirichlet.constraints(), n, ScalingRule::DiagonalUnity).unwrap();
        let rows = t.matrix.nrows();
        (
            diff_op_rect(2, n, rows).unwrap().matmul(&t.matrix).unwrap(),
            conv_chain_rect(2, n, rows).unwrap().matmul(&t.matrix).unwrap(),
        )
    }

    #[test]
    fn dirichlet_extremes() {
        // truncation 63 pairs with the degree-64 bounds
        let (d, s) = dirichlet_pencil(63);
        let small = extreme_eigs(&d, &s, Which::Smallest).unwrap();
        let b = dirichlet2_bounds(64);
        assert!(b.hi >= small && (b.hi / small - 1.0).abs() < 0.09);
        let (d2, s2) = dirichlet_pencil(31);
        let big32 = extreme_eigs(&d2, &s2, Which::Largest).unwrap();
        let big64 = extreme_eigs(&d, &s, Which::Largest).unwrap();
        assert!(big64.abs() >= big32.abs());
    }

    #[test]
    fn scalar_adi_examples() {
        let sh = shifts(-4.0, -1.0, 1.0, 4.0, 3, ShiftOrder::Ascending).unwrap();
        let mut empty = sh.clone();
        empty.p.clear();
        empty.q.clear();
        assert_eq!(scalar_adi(-2.0, 2.0, &empty).unwrap(), 1.0);
        assert_eq!(scalar_adi(sh.q[0], 2.0, &sh).unwrap(), 0.0);
        assert!(scalar_adi(sh.p[0], 2.0, &sh).is_err());
        let g = cross_ratio_gamma(-4.0, -1.0, 1.0, 4.0).unwrap();
        let bound = zolotarev_bound(g, 3);
        let mut worst: f64 = 0.0;
        for i in 0..=1000 {
            let lam = -4.0 + 3.0 * i as f64 / 1000.0;
            let mu = 1.0 + 3.0 * i as f64 / 1000.0;
            worst = worst.max(scalar_adi(lam, mu, &sh).unwrap().abs());
        }
        assert!(worst <= bound * 1.01);
    }
}
