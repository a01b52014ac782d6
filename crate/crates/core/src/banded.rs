//! Banded matrices stored by diagonals, banded LU with partial pivoting,
//! and multi right-hand-side solves.

use ndarray::{Array2, ArrayView2, Axis};
use rayon::prelude::*;

use crate::error::{Error, Result};

/// Columns (or rows, for right solves) handled per parallel task.
const CHUNK: usize = 64;

/// Real matrix with `lower` subdiagonals and `upper` superdiagonals.
///
/// Entry `(i, j)` lives at `data[(upper + i - j) * ncols + j]`.
#[derive(Clone, Debug, PartialEq)]
pub struct BandedMatrix {
    nrows: usize,
    ncols: usize,
    lower: usize,
    upper: usize,
    data: Vec<f64>,
}

impl BandedMatrix {
    /// Zero matrix. Bandwidths are clipped to the dimensions.
    pub fn zeros(nrows: usize, ncols: usize, lower: usize, upper: usize) -> Self {
        let lower = lower.min(nrows.saturating_sub(1));
        let upper = upper.min(ncols.saturating_sub(1));
        BandedMatrix {
            nrows,
            ncols,
            lower,
            upper,
            data: vec![0.0; (lower + upper + 1) * ncols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n, 0, 0);
        m.data.iter_mut().for_each(|v| *v = 1.0);
        m
    }

    /// Diagonal matrix with the given entries.
    pub fn from_diag(d: &[f64]) -> Self {
        let mut m = Self::zeros(d.len(), d.len(), 0, 0);
        m.data.copy_from_slice(d);
        m
    }

    /// Copy the band of a dense matrix; entries outside the band are ignored.
    pub fn from_dense(a: ArrayView2<f64>, lower: usize, upper: usize) -> Self {
        let (nr, nc) = a.dim();
        let mut m = Self::zeros(nr, nc, lower, upper);
        for j in 0..nc {
            for i in m.col_range(j) {
                let k = m.idx(i, j);
                m.data[k] = a[[i, j]];
            }
        }
        m
    }

    pub fn nrows(&self) -> usize {
        self.nrows
    }

    pub fn ncols(&self) -> usize {
        self.ncols
    }

    pub fn lower(&self) -> usize {
        self.lower
    }

    pub fn upper(&self) -> usize {
        self.upper
    }

    pub fn dim(&self) -> (usize, usize) {
        (self.nrows, self.ncols)
    }

    #[inline]
    fn idx(&self, i: usize, j: usize) -> usize {
        (self.upper + i - j) * self.ncols + j
    }

    #[inline]
    pub fn in_band(&self, i: usize, j: usize) -> bool {
        i < self.nrows && j < self.ncols && j + self.lower >= i && j <= i + self.upper
    }

    /// Rows holding band entries of column `j`.
    #[inline]
    pub fn col_range(&self, j: usize) -> std::ops::Range<usize> {
        j.saturating_sub(self.upper)..(j + self.lower + 1).min(self.nrows)
    }

    /// Columns holding band entries of row `i`.
    #[inline]
    pub fn row_range(&self, i: usize) -> std::ops::Range<usize> {
        i.saturating_sub(self.lower)..(i + self.upper + 1).min(self.ncols)
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        if self.in_band(i, j) {
            self.data[self.idx(i, j)]
        } else {
            0.0
        }
    }

    /// Panics if `(i, j)` lies outside the band.
    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        assert!(self.in_band(i, j), "({i}, {j}) outside band");
        let k = self.idx(i, j);
        self.data[k] = v;
    }

    #[inline]
    pub fn add_at(&mut self, i: usize, j: usize, v: f64) {
        assert!(self.in_band(i, j), "({i}, {j}) outside band");
        let k = self.idx(i, j);
        self.data[k] += v;
    }

    pub fn to_dense(&self) -> Array2<f64> {
        let mut a = Array2::zeros((self.nrows, self.ncols));
        for j in 0..self.ncols {
            for i in self.col_range(j) {
                a[[i, j]] = self.data[self.idx(i, j)];
            }
        }
        a
    }

    pub fn transpose(&self) -> BandedMatrix {
        let mut t = Self::zeros(self.ncols, self.nrows, self.upper, self.lower);
        for j in 0..self.ncols {
            for i in self.col_range(j) {
                t.set(j, i, self.get(i, j));
            }
        }
        t
    }

    pub fn scaled(&self, s: f64) -> BandedMatrix {
        let mut m = self.clone();
        m.data.iter_mut().for_each(|v| *v *= s);
        m
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0_f64, |m, v| m.max(v.abs()))
    }

    /// `self + s * other`.
    pub fn add_scaled(&self, other: &BandedMatrix, s: f64) -> Result<BandedMatrix> {
        if self.dim() != other.dim() {
            return Err(Error::Dimension(format!(
                "add: {:?} vs {:?}",
                self.dim(),
                other.dim()
            )));
        }
        let mut c = Self::zeros(
            self.nrows,
            self.ncols,
            self.lower.max(other.lower),
            self.upper.max(other.upper),
        );
        for j in 0..self.ncols {
            for i in self.col_range(j) {
                c.add_at(i, j, self.get(i, j));
            }
            for i in other.col_range(j) {
                c.add_at(i, j, s * other.get(i, j));
            }
        }
        Ok(c)
    }

    /// Exact banded product `self * other`.
    pub fn matmul(&self, other: &BandedMatrix) -> Result<BandedMatrix> {
        if self.ncols != other.nrows {
            return Err(Error::Dimension(format!(
                "matmul: {:?} * {:?}",
                self.dim(),
                other.dim()
            )));
        }
        let mut c = Self::zeros(
            self.nrows,
            other.ncols,
            self.lower + other.lower,
            self.upper + other.upper,
        );
        for j in 0..other.ncols {
            for k in other.col_range(j) {
                let bkj = other.get(k, j);
                if bkj == 0.0 {
                    continue;
                }
                for i in self.col_range(k) {
                    c.add_at(i, j, self.get(i, k) * bkj);
                }
            }
        }
        Ok(c)
    }

    /// Leading `nrows x ncols` block.
    pub fn truncate(&self, nrows: usize, ncols: usize) -> BandedMatrix {
        self.resized(nrows.min(self.nrows), ncols.min(self.ncols))
    }

    /// Truncate or zero-pad to `nrows x ncols`, keeping the bandwidths.
    pub fn resized(&self, nrows: usize, ncols: usize) -> BandedMatrix {
        let mut t = Self::zeros(nrows, ncols, self.lower, self.upper);
        for j in 0..ncols.min(self.ncols) {
            for i in t.col_range(j) {
                if i < self.nrows {
                    t.set(i, j, self.get(i, j));
                }
            }
        }
        t
    }

    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.ncols);
        let mut y = vec![0.0; self.nrows];
        for j in 0..self.ncols {
            if x[j] == 0.0 {
                continue;
            }
            for i in self.col_range(j) {
                y[i] += self.data[self.idx(i, j)] * x[j];
            }
        }
        y
    }

    /// `self * x` for a dense `x`.
    pub fn mul_dense(&self, x: ArrayView2<f64>) -> Result<Array2<f64>> {
        if x.nrows() != self.ncols {
            return Err(Error::Dimension(format!(
                "banded {:?} * dense {:?}",
                self.dim(),
                x.dim()
            )));
        }
        let x = x.as_standard_layout();
        let mut out = Array2::<f64>::zeros((self.nrows, x.ncols()));
        out.axis_iter_mut(Axis(0))
            .into_par_iter()
            .enumerate()
            .for_each(|(i, mut row)| {
                let row = row.as_slice_mut().expect("standard layout");
                for k in self.row_range(i) {
                    let a = self.data[self.idx(i, k)];
                    if a == 0.0 {
                        continue;
                    }
                    let xk = x.row(k);
                    let xk = xk.as_slice().expect("standard layout");
                    for (o, v) in row.iter_mut().zip(xk) {
                        *o += a * v;
                    }
                }
            });
        Ok(out)
    }

    /// `x * self` for a dense `x`.
    pub fn rmul_dense(&self, x: ArrayView2<f64>) -> Result<Array2<f64>> {
        if x.ncols() != self.nrows {
            return Err(Error::Dimension(format!(
                "dense {:?} * banded {:?}",
                x.dim(),
                self.dim()
            )));
        }
        let x = x.as_standard_layout();
        let (p, q) = (self.nrows, self.ncols);
        let mut out = Array2::<f64>::zeros((x.nrows(), q));
        out.axis_iter_mut(Axis(0))
            .into_par_iter()
            .enumerate()
            .for_each(|(r, mut row)| {
                let row = row.as_slice_mut().expect("standard layout");
                let xr = x.row(r);
                let xr = xr.as_slice().expect("standard layout");
                // walk diagonals: band row b holds entries (j + b - upper, j)
                for b in 0..=(self.lower + self.upper) {
                    let diag = &self.data[b * q..(b + 1) * q];
                    let j0 = self.upper.saturating_sub(b);
                    let j1 = (p + self.upper).saturating_sub(b).min(q);
                    for j in j0..j1 {
                        row[j] += xr[j + b - self.upper] * diag[j];
                    }
                }
            });
        Ok(out)
    }
}

/// Which side of the unknown the factored matrix sits on.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SolveSide {
    /// Solve `M X = R` with a factorization of `M`.
    Left,
    /// Solve `X M = R` with a factorization of `M^T`.
    Right,
}

/// LU factorization `P A = L U` of a square banded matrix.
#[derive(Clone, Debug)]
pub struct BandedLu {
    n: usize,
    kl: usize,
    /// L multipliers below the diagonal, U on and above with `kl` extra
    /// superdiagonals of fill.
    factors: BandedMatrix,
    pivots: Vec<usize>,
}

impl BandedLu {
    pub fn new(a: &BandedMatrix) -> Result<Self> {
        if a.nrows != a.ncols {
            return Err(Error::Dimension(format!("LU of non-square {:?}", a.dim())));
        }
        let n = a.nrows;
        let kl = a.lower;
        let ku = a.upper;
        let mut f = BandedMatrix::zeros(n, n, kl, ku + kl);
        for j in 0..n {
            for i in a.col_range(j) {
                f.set(i, j, a.get(i, j));
            }
        }
        let mut pivots = vec![0; n];
        for k in 0..n {
            let last = (k + kl).min(n.saturating_sub(1));
            let mut p = k;
            let mut best = f.get(k, k).abs();
            for i in k + 1..=last {
                let v = f.get(i, k).abs();
                if v > best {
                    best = v;
                    p = i;
                }
            }
            if best == 0.0 || !best.is_finite() {
                return Err(Error::Singular { column: k });
            }
            pivots[k] = p;
            let jlast = (k + ku + kl).min(n - 1);
            if p != k {
                for j in k..=jlast {
                    let ik = f.idx(k, j);
                    let ip = f.idx(p, j);
                    f.data.swap(ik, ip);
                }
            }
            let pivot = f.get(k, k);
            for i in k + 1..=last {
                let ii = f.idx(i, k);
                f.data[ii] /= pivot;
            }
            for j in k + 1..=jlast {
                let akj = f.get(k, j);
                if akj == 0.0 {
                    continue;
                }
                for i in k + 1..=last {
                    let l = f.get(i, k);
                    let ij = f.idx(i, j);
                    f.data[ij] -= l * akj;
                }
            }
        }
        Ok(BandedLu {
            n,
            kl,
            factors: f,
            pivots,
        })
    }

    /// Factor `a^T`, ready for right solves `X a = R`.
    pub fn new_transposed(a: &BandedMatrix) -> Result<Self> {
        Self::new(&a.transpose())
    }

    pub fn size(&self) -> usize {
        self.n
    }

    pub fn pivots(&self) -> &[usize] {
        &self.pivots
    }

    /// Solve in place for a row-major `n x w` block.
    fn solve_block(&self, buf: &mut [f64], w: usize) {
        let n = self.n;
        let f = &self.factors;
        let reach = f.upper;
        for k in 0..n {
            let p = self.pivots[k];
            if p != k {
                let (a, b) = buf.split_at_mut(p * w);
                a[k * w..(k + 1) * w].swap_with_slice(&mut b[..w]);
            }
            let last = (k + self.kl).min(n - 1);
            let (head, tail) = buf.split_at_mut((k + 1) * w);
            let rk = &head[k * w..];
            for i in k + 1..=last {
                let l = f.get(i, k);
                if l == 0.0 {
                    continue;
                }
                let ri = &mut tail[(i - k - 1) * w..(i - k) * w];
                for (x, y) in ri.iter_mut().zip(rk) {
                    *x -= l * y;
                }
            }
        }
        for k in (0..n).rev() {
            let jlast = (k + reach).min(n - 1);
            let (head, tail) = buf.split_at_mut((k + 1) * w);
            let rk = &mut head[k * w..];
            for j in k + 1..=jlast {
                let u = f.get(k, j);
                if u == 0.0 {
                    continue;
                }
                let rj = &tail[(j - k - 1) * w..(j - k) * w];
                for (x, y) in rk.iter_mut().zip(rj) {
                    *x -= u * y;
                }
            }
            let d = f.get(k, k);
            rk.iter_mut().for_each(|x| *x /= d);
        }
    }

    /// Solve a single vector in place.
    pub fn solve_vec(&self, b: &mut [f64]) {
        assert_eq!(b.len(), self.n);
        self.solve_block(b, 1);
    }

    /// Left: `M X = rhs`. Right: `X M = rhs`, where `self` factors `M^T`.
    pub fn solve(&self, rhs: ArrayView2<f64>, side: SolveSide) -> Result<Array2<f64>> {
        let n = self.n;
        let mut out = rhs.as_standard_layout().into_owned();
        match side {
            SolveSide::Left => {
                if rhs.nrows() != n {
                    return Err(Error::Dimension(format!(
                        "left solve: size {n} vs rhs {:?}",
                        rhs.dim()
                    )));
                }
                out.axis_chunks_iter_mut(Axis(1), CHUNK)
                    .into_par_iter()
                    .for_each(|mut chunk| {
                        let w = chunk.ncols();
                        let mut buf = vec![0.0; n * w];
                        for (k, row) in chunk.rows().into_iter().enumerate() {
                            for (c, v) in row.iter().enumerate() {
                                buf[k * w + c] = *v;
                            }
                        }
                        self.solve_block(&mut buf, w);
                        for (k, mut row) in chunk.rows_mut().into_iter().enumerate() {
                            for (c, v) in row.iter_mut().enumerate() {
                                *v = buf[k * w + c];
                            }
                        }
                    });
            }
            SolveSide::Right => {
                if rhs.ncols() != n {
                    return Err(Error::Dimension(format!(
                        "right solve: size {n} vs rhs {:?}",
                        rhs.dim()
                    )));
                }
                out.axis_chunks_iter_mut(Axis(0), CHUNK)
                    .into_par_iter()
                    .for_each(|mut chunk| {
                        let w = chunk.nrows();
                        let mut buf = vec![0.0; n * w];
                        for (c, row) in chunk.rows().into_iter().enumerate() {
                            for (k, v) in row.iter().enumerate() {
                                buf[k * w + c] = *v;
                            }
                        }
                        self.solve_block(&mut buf, w);
                        for (c, mut row) in chunk.rows_mut().into_iter().enumerate() {
                            for (k, v) in row.iter_mut().enumerate() {
                                *v = buf[k * w + c];
                            }
                        }
                    });
            }
        }
        Ok(out)
    }
}
