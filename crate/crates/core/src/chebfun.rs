//! Tensor-product Chebyshev interpolation, evaluation and resolution checks.

use ndarray::{s, Array2, ArrayView2, Axis};
use rayon::prelude::*;
use rustfft::num_complex::Complex;
use rustfft::FftPlanner;

use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq)]
pub enum BasisTag {
    Chebyshev,
    /// Recombined basis, tagged with a boundary-condition descriptor.
    Recombined(String),
    Ultraspherical(usize),
}

/// Coefficients of a bivariate function: entry `(i, j)` multiplies
/// `T_i(y) T_j(x)`.
#[derive(Clone, Debug, PartialEq)]
pub struct Cheb2D {
    pub coeffs: Array2<f64>,
    pub basis: BasisTag,
}

impl Cheb2D {
    pub fn new(coeffs: Array2<f64>) -> Self {
        Cheb2D {
            coeffs,
            basis: BasisTag::Chebyshev,
        }
    }

    pub fn zeros(n: usize, m: usize) -> Self {
        Self::new(Array2::zeros((n, m)))
    }

    pub fn dim(&self) -> (usize, usize) {
        self.coeffs.dim()
    }

    /// Evaluate at scattered points `(x, y)`.
    pub fn eval(&self, pts: &[(f64, f64)]) -> Result<Vec<f64>> {
        clenshaw_eval(self, pts)
    }

    /// Values on a tensor grid; rows follow `ys`, columns follow `xs`.
    pub fn eval_grid(&self, xs: &[f64], ys: &[f64]) -> Array2<f64> {
        eval_grid(self.coeffs.view(), xs, ys)
    }

    pub fn max_abs(&self) -> f64 {
        self.coeffs.iter().fold(0.0_f64, |m, v| m.max(v.abs()))
    }
}

/// Second-kind Chebyshev points `cos(pi k/(n-1))`, from 1 down to -1.
pub fn cheb_points(n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![0.0];
    }
    let m = (n - 1) as f64;
    // sine form keeps the points exactly symmetric
    (0..n)
        .map(|k| (std::f64::consts::PI * (m - 2.0 * k as f64) / (2.0 * m)).sin())
        .collect()
}

/// DCT-I based value-to-coefficient map, reusable across many columns.
pub struct ChebTransform {
    n: usize,
    fft: Option<std::sync::Arc<dyn rustfft::Fft<f64>>>,
}

impl ChebTransform {
    pub fn new(n: usize) -> Self {
        assert!(n >= 1);
        let fft = if n >= 2 {
            Some(FftPlanner::new().plan_fft_forward(2 * (n - 1)))
        } else {
            None
        };
        ChebTransform { n, fft }
    }

    /// Values at `cheb_points(n)` to Chebyshev coefficients, in place.
    pub fn apply(&self, v: &mut [f64]) {
        let n = self.n;
        assert_eq!(v.len(), n);
        let Some(fft) = &self.fft else {
            return;
        };
        let m = 2 * (n - 1);
        let mut buf: Vec<Complex<f64>> = Vec::with_capacity(m);
        buf.extend(v.iter().map(|&x| Complex::new(x, 0.0)));
        buf.extend(v[1..n - 1].iter().rev().map(|&x| Complex::new(x, 0.0)));
        fft.process(&mut buf);
        let scale = 1.0 / (n - 1) as f64;
        for (k, out) in v.iter_mut().enumerate() {
            *out = buf[k].re * scale;
        }
        v[0] *= 0.5;
        v[n - 1] *= 0.5;
    }
}

/// Chebyshev coefficients of samples on `cheb_points(vals.len())`.
pub fn coeffs_1d(vals: &[f64]) -> Vec<f64> {
    let mut v = vals.to_vec();
    ChebTransform::new(v.len()).apply(&mut v);
    v
}

/// Coefficients from an `n x m` sample matrix: rows follow `y`, columns `x`.
pub fn coeffs_2d(vals: ArrayView2<f64>) -> Array2<f64> {
    let (n, m) = vals.dim();
    let mut c = vals.as_standard_layout().into_owned();
    let tx = ChebTransform::new(m);
    c.axis_iter_mut(Axis(0)).into_par_iter().for_each(|mut row| {
        tx.apply(row.as_slice_mut().expect("standard layout"));
    });
    let ty = ChebTransform::new(n);
    let mut ct = c.t().as_standard_layout().into_owned();
    ct.axis_iter_mut(Axis(0)).into_par_iter().for_each(|mut col| {
        ty.apply(col.as_slice_mut().expect("standard layout"));
    });
    ct.t().as_standard_layout().into_owned()
}

/// Sample a fallible `f(x, y)` on the `n x m` grid and interpolate.
pub fn cheb_transform_2d_try<F>(f: F, n: usize, m: usize) -> Result<Cheb2D>
where
    F: Fn(f64, f64) -> Result<f64> + Sync,
{
    if n == 0 || m == 0 {
        return Err(Error::InvalidArgument("grid sizes must be >= 1".into()));
    }
    let xs = cheb_points(m);
    let ys = cheb_points(n);
    let mut vals = Array2::<f64>::zeros((n, m));
    vals.axis_iter_mut(Axis(0))
        .into_par_iter()
        .enumerate()
        .try_for_each(|(i, mut row)| -> Result<()> {
            for (j, v) in row.iter_mut().enumerate() {
                let (x, y) = (xs[j], ys[i]);
                let fx = f(x, y)?;
                if !fx.is_finite() {
                    return Err(Error::NonFiniteSample { x, y, value: fx });
                }
                *v = fx;
            }
            Ok(())
        })?;
    Ok(Cheb2D::new(coeffs_2d(vals.view())))
}

pub fn cheb_transform_2d<F>(f: F, n: usize, m: usize) -> Result<Cheb2D>
where
    F: Fn(f64, f64) -> f64 + Sync,
{
    cheb_transform_2d_try(|x, y| Ok(f(x, y)), n, m)
}

/// Adaptive 1D interpolation: sample at `2^j + 1` points until the tail is
/// below `tol` relative, then chop.
pub fn adaptive_1d<F>(f: F, tol: f64, max_len: usize) -> Result<Vec<f64>>
where
    F: Fn(f64) -> Result<f64>,
{
    let mut n = 17;
    loop {
        let pts = cheb_points(n);
        let mut vals = Vec::with_capacity(n);
        for &x in &pts {
            let v = f(x)?;
            if !v.is_finite() {
                return Err(Error::NonFiniteSample { x, y: f64::NAN, value: v });
            }
            vals.push(v);
        }
        let c = coeffs_1d(&vals);
        let scale = c.iter().fold(0.0_f64, |m, v| m.max(v.abs())).max(1e-300);
        let tail = c[n - 3..].iter().fold(0.0_f64, |m, v| m.max(v.abs()));
        if tail <= tol * scale || n >= max_len {
            let mut len = n;
            while len > 1 && c[len - 1].abs() <= tol * scale {
                len -= 1;
            }
            return Ok(c[..len].to_vec());
        }
        n = 2 * n - 1;
    }
}

/// Clenshaw recurrence for `sum c_k T_k(x)`.
pub fn clenshaw(c: &[f64], x: f64) -> f64 {
    let (mut b1, mut b2) = (0.0, 0.0);
    for &ck in c.iter().skip(1).rev() {
        let b0 = ck + 2.0 * x * b1 - b2;
        b2 = b1;
        b1 = b0;
    }
    c.first().copied().unwrap_or(0.0) + x * b1 - b2
}

fn check_point(x: f64, y: f64) -> Result<()> {
    const SLACK: f64 = 1e-14;
    if !(x.abs() <= 1.0 + SLACK && y.abs() <= 1.0 + SLACK) {
        return Err(Error::OutOfDomain { x, y });
    }
    Ok(())
}

/// Nested Clenshaw: collapse along `x` for each row, then along `y`.
pub fn clenshaw_eval(c: &Cheb2D, pts: &[(f64, f64)]) -> Result<Vec<f64>> {
    if c.basis != BasisTag::Chebyshev {
        return Err(Error::InvalidArgument(format!(
            "evaluation needs Chebyshev coefficients, got {:?}",
            c.basis
        )));
    }
    pts.iter()
        .map(|&(x, y)| {
            check_point(x, y)?;
            let inner: Vec<f64> = c
                .coeffs
                .rows()
                .into_iter()
                .map(|row| clenshaw(row.as_slice().unwrap_or(&row.to_vec()), x))
                .collect();
            Ok(clenshaw(&inner, y))
        })
        .collect()
}

/// `T_k(t)` for `k < n`; rows follow `ts`.
pub fn cheb_vandermonde(ts: &[f64], n: usize) -> Array2<f64> {
    let mut v = Array2::zeros((ts.len(), n));
    for (i, &t) in ts.iter().enumerate() {
        if n > 0 {
            v[[i, 0]] = 1.0;
        }
        if n > 1 {
            v[[i, 1]] = t;
        }
        for k in 2..n {
            v[[i, k]] = 2.0 * t * v[[i, k - 1]] - v[[i, k - 2]];
        }
    }
    v
}

/// Tensor-grid evaluation via two matrix products.
pub fn eval_grid(c: ArrayView2<f64>, xs: &[f64], ys: &[f64]) -> Array2<f64> {
    let (n, m) = c.dim();
    let vy = cheb_vandermonde(ys, n);
    let vx = cheb_vandermonde(xs, m);
    vy.dot(&c).dot(&vx.t())
}

/// Trailing two rows and two columns all below `tol * max|c|`.
pub fn is_resolved(c: &Cheb2D, tol: f64) -> bool {
    let (n, m) = c.dim();
    if n < 8 || m < 8 {
        return false;
    }
    let scale = c.max_abs().max(1e-300);
    let rows = c.coeffs.slice(s![n - 2.., ..]);
    let cols = c.coeffs.slice(s![.., m - 2..]);
    let tail = rows
        .iter()
        .chain(cols.iter())
        .fold(0.0_f64, |acc, v| acc.max(v.abs()));
    tail <= tol * scale
}

/// Zero-pad or truncate to `n2 x m2`.
pub fn pad_or_trim(c: &Cheb2D, n2: usize, m2: usize) -> Cheb2D {
    Cheb2D {
        coeffs: resize(c.coeffs.view(), n2, m2),
        basis: c.basis.clone(),
    }
}

pub fn resize(a: ArrayView2<f64>, n2: usize, m2: usize) -> Array2<f64> {
    let (n, m) = a.dim();
    let mut out = Array2::zeros((n2, m2));
    let (rn, rm) = (n.min(n2), m.min(m2));
    out.slice_mut(s![..rn, ..rm]).assign(&a.slice(s![..rn, ..rm]));
    out
}

/// Chebyshev coefficients of the derivative (same length, last entry 0).
pub fn diff_coeffs(c: &[f64]) -> Vec<f64> {
    let n = c.len();
    let mut d = vec![0.0; n];
    if n < 2 {
        return d;
    }
    for k in (1..n).rev() {
        let next = if k + 1 < n { d[k + 1] } else { 0.0 };
        d[k - 1] = next + 2.0 * k as f64 * c[k];
    }
    d[0] *= 0.5;
    d
}
