//! ADI and factored ADI for the generalized Sylvester equation
//! `A1 X B2 + A2 X B1 = F`.

use std::time::Instant;

use log::warn;
use ndarray::{concatenate, s, Array2, ArrayView2, Axis};
use serde::Serialize;

use crate::banded::{BandedLu, BandedMatrix, SolveSide};
use crate::error::{Error, Result};
use crate::recomb::TransformOp;
use crate::zolotarev::ShiftSchedule;

/// `F = U V^T`.
#[derive(Clone, Debug, PartialEq)]
pub struct LowRankRhs {
    pub u: Array2<f64>,
    pub v: Array2<f64>,
}

impl LowRankRhs {
    pub fn new(u: Array2<f64>, v: Array2<f64>) -> Result<Self> {
        if u.ncols() != v.ncols() || u.ncols() == 0 {
            return Err(Error::Dimension(format!(
                "low-rank factors {:?} and {:?}",
                u.dim(),
                v.dim()
            )));
        }
        if u.iter().chain(v.iter()).any(|x| !x.is_finite()) {
            return Err(Error::InvalidArgument("non-finite low-rank factor".into()));
        }
        Ok(LowRankRhs { u, v })
    }

    pub fn rank(&self) -> usize {
        self.u.ncols()
    }

    pub fn to_dense(&self) -> Array2<f64> {
        self.u.dot(&self.v.t())
    }

    /// Cross approximation with full pivoting, stopped once the largest
    /// remaining entry is below `tol * max|F|`.
    pub fn from_aca(f: ArrayView2<f64>, tol: f64) -> Result<Self> {
        let (n, m) = f.dim();
        let mut r = f.to_owned();
        let scale = r.iter().fold(0.0_f64, |a, v| a.max(v.abs()));
        let mut us: Vec<Array2<f64>> = Vec::new();
        let mut vs: Vec<Array2<f64>> = Vec::new();
        while us.len() < n.min(m) {
            let mut best = (0, 0, 0.0_f64);
            for ((i, j), v) in r.indexed_iter() {
                if v.abs() > best.2 {
                    best = (i, j, v.abs());
                }
            }
            if best.2 <= tol * scale || best.2 == 0.0 {
                break;
            }
            let (i, j) = (best.0, best.1);
            let piv = r[[i, j]];
            let u = r.column(j).to_owned().insert_axis(Axis(1));
            let v = r.row(i).mapv(|x| x / piv).insert_axis(Axis(1));
            r -= &u.dot(&v.t());
            us.push(u);
            vs.push(v);
        }
        if us.is_empty() {
            us.push(Array2::zeros((n, 1)));
            vs.push(Array2::zeros((m, 1)));
        }
        let uv: Vec<_> = us.iter().map(|a| a.view()).collect();
        let vv: Vec<_> = vs.iter().map(|a| a.view()).collect();
        let u = concatenate(Axis(1), &uv).map_err(|e| Error::Dimension(e.to_string()))?;
        let v = concatenate(Axis(1), &vv).map_err(|e| Error::Dimension(e.to_string()))?;
        LowRankRhs::new(u, v)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Rhs {
    Dense(Array2<f64>),
    LowRank(LowRankRhs),
}

impl Rhs {
    pub fn to_dense(&self) -> Array2<f64> {
        match self {
            Rhs::Dense(f) => f.clone(),
            Rhs::LowRank(l) => l.to_dense(),
        }
    }
}

#[derive(Clone, Debug)]
pub struct SylvesterSystem {
    pub a1: BandedMatrix,
    pub b1: BandedMatrix,
    pub a2: BandedMatrix,
    pub b2: BandedMatrix,
    pub rhs: Rhs,
    /// `(T_y, T_x)` for the back-transform.
    pub transforms: Option<(TransformOp, TransformOp)>,
}

impl SylvesterSystem {
    pub fn new(
        a1: BandedMatrix,
        b1: BandedMatrix,
        a2: BandedMatrix,
        b2: BandedMatrix,
        rhs: Rhs,
    ) -> Result<Self> {
        let n = a1.nrows();
        for m in [&a1, &b1, &a2, &b2] {
            if m.dim() != (n, n) {
                return Err(Error::Dimension(format!("system matrix {:?}, expected {n}x{n}", m.dim())));
            }
        }
        let fd = match &rhs {
            Rhs::Dense(f) => f.dim(),
            Rhs::LowRank(l) => (l.u.nrows(), l.v.nrows()),
        };
        if fd != (n, n) {
            return Err(Error::Dimension(format!("rhs {fd:?}, expected {n}x{n}")));
        }
        Ok(SylvesterSystem { a1, b1, a2, b2, rhs, transforms: None })
    }

    pub fn with_transforms(mut self, ty: TransformOp, tx: TransformOp) -> Self {
        self.transforms = Some((ty, tx));
        self
    }

    pub fn n(&self) -> usize {
        self.a1.nrows()
    }

    /// `B1 = A1^T` and `B2 = A2^T` exactly.
    pub fn is_symmetric(&self) -> bool {
        self.b1 == self.a1.transpose() && self.b2 == self.a2.transpose()
    }

    /// `A1 X B2 + A2 X B1`.
    pub fn apply(&self, x: ArrayView2<f64>) -> Result<Array2<f64>> {
        let l = self.b2.rmul_dense(self.a1.mul_dense(x)?.view())?;
        let r = self.b1.rmul_dense(self.a2.mul_dense(x)?.view())?;
        Ok(l + r)
    }

    /// Frobenius norm of the residual.
    pub fn residual(&self, x: ArrayView2<f64>) -> Result<f64> {
        Ok(fro(&(self.apply(x)? - self.rhs.to_dense())))
    }

    /// `T_y X T_x^T` with the full (untruncated) recombination matrices.
    pub fn back_transform(&self, x: ArrayView2<f64>) -> Result<Array2<f64>> {
        let (ty, tx) = self
            .transforms
            .as_ref()
            .ok_or_else(|| Error::InvalidArgument("system carries no transforms".into()))?;
        let left = ty.matrix.mul_dense(x)?;
        tx.matrix.transpose().rmul_dense(left.view())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Termination {
    Tolerance,
    Stagnation,
    ScheduleExhausted,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SolveReport {
    pub iterations_run: usize,
    pub increment_history: Vec<(usize, f64)>,
    pub terminated_by: Termination,
    pub wall_time: f64,
}

/// Accumulated `Z D Y^T`.
#[derive(Clone, Debug, PartialEq)]
pub struct LowRankSolution {
    pub z: Array2<f64>,
    pub y: Array2<f64>,
    pub d: Vec<f64>,
}

impl LowRankSolution {
    pub fn reconstruct(&self) -> Array2<f64> {
        let zd = &self.z * &ndarray::Array1::from(self.d.clone());
        zd.dot(&self.y.t())
    }

    pub fn rank(&self) -> usize {
        self.d.len()
    }
}

pub fn fro(a: &Array2<f64>) -> f64 {
    a.iter().map(|v| v * v).sum::<f64>().sqrt()
}

/// Zero-pad an iterate to `n2 x n2`.
pub fn warm_restart(prev: ArrayView2<f64>, n2: usize) -> Result<Array2<f64>> {
    let (r, c) = prev.dim();
    if n2 < r || n2 < c {
        return Err(Error::InvalidArgument(format!("cannot restart {r}x{c} into {n2}x{n2}")));
    }
    let mut out = Array2::zeros((n2, n2));
    out.slice_mut(s![..r, ..c]).assign(&prev);
    Ok(out)
}

/// Shifts whose size is below the rounding level of the interval.
fn usable_shifts(shifts: &ShiftSchedule) -> Vec<(usize, f64, f64)> {
    let ((a, b), (c, d)) = shifts.intervals;
    let scale = [a, b, c, d].iter().fold(0.0_f64, |m, v| m.max(v.abs()));
    let floor = 4.0 * f64::EPSILON * scale;
    let mut out = Vec::with_capacity(shifts.len());
    for (j, (&p, &q)) in shifts.p.iter().zip(&shifts.q).enumerate() {
        if p.abs() < floor {
            warn!("skipping shift {j}: |p| = {p:e} below {floor:e}");
            continue;
        }
        out.push((j, p, q));
    }
    out
}

fn factor(m: BandedMatrix, index: usize, side: SolveSide) -> Result<BandedLu> {
    let lu = match side {
        SolveSide::Left => BandedLu::new(&m),
        SolveSide::Right => BandedLu::new_transposed(&m),
    };
    lu.map_err(|e| Error::SingularShift { index, source: Box::new(e) })
}

/// Stopping-rule bookkeeping shared by both solvers.
struct Monitor {
    eps: f64,
    tau: usize,
    history: Vec<(usize, f64)>,
}

impl Monitor {
    fn due(&self, step: usize, last: bool) -> bool {
        step % self.tau == 0 || last
    }

    fn record(&mut self, step: usize, incr: f64) -> Option<Termination> {
        self.history.push((step, incr));
        if incr <= self.eps {
            return Some(Termination::Tolerance);
        }
        let k = self.history.len();
        if k >= 2 {
            let prev = self.history[k - 2].1;
            if prev > self.eps && (incr - prev).abs() < 0.1 * prev {
                return Some(Termination::Stagnation);
            }
        }
        None
    }
}

fn relative(diff: f64, norm: f64) -> f64 {
    if diff == 0.0 {
        0.0
    } else {
        diff / norm
    }
}

/// Generalized ADI. Returns `X` with `A1 X B2 + A2 X B1 ~ F`.
pub fn adi_solve(
    sys: &SylvesterSystem,
    shifts: &ShiftSchedule,
    x0: Option<ArrayView2<f64>>,
    eps: f64,
    tau: usize,
) -> Result<(Array2<f64>, SolveReport)> {
    let start = Instant::now();
    let n = sys.n();
    if tau == 0 {
        return Err(Error::InvalidArgument("check cadence must be >= 1".into()));
    }
    let f = sys.rhs.to_dense();
    let a2_lu = BandedLu::new(&sys.a2)?;
    // iterate on X^ = A2 X
    let mut xh = match x0 {
        Some(x) => {
            if x.dim() != (n, n) {
                return Err(Error::Dimension(format!("initial iterate {:?}", x.dim())));
            }
            sys.a2.mul_dense(x)?
        }
        None => Array2::zeros((n, n)),
    };
    let plan = usable_shifts(shifts);
    if plan.is_empty() {
        return Err(Error::InvalidArgument("empty shift schedule".into()));
    }
    let mut mon = Monitor { eps, tau, history: Vec::new() };
    let mut term = Termination::ScheduleExhausted;
    let mut steps = 0;
    for (step, &(j, p, q)) in plan.iter().enumerate() {
        let step = step + 1;
        let ml = factor(sys.a1.add_scaled(&sys.a2, -p)?, j, SolveSide::Left)?;
        let nr = factor(sys.b1.add_scaled(&sys.b2, q)?, j, SolveSide::Right)?;
        let np = sys.b1.add_scaled(&sys.b2, p)?;
        let r = &f - &np.rmul_dense(xh.view())?;
        let h = ml.solve(r.view(), SolveSide::Left)?;
        let mq = sys.a1.add_scaled(&sys.a2, -q)?;
        let r2 = &f - &mq.mul_dense(h.view())?;
        let next = nr.solve(r2.view(), SolveSide::Right)?;
        if next.iter().any(|v| !v.is_finite()) {
            return Err(Error::Divergence { step });
        }
        steps = step;
        let last = step == plan.len();
        if mon.due(step, last) {
            let both = concatenate(Axis(1), &[(&next - &xh).view(), next.view()])
                .map_err(|e| Error::Dimension(e.to_string()))?;
            let sol = a2_lu.solve(both.view(), SolveSide::Left)?;
            let diff = fro(&sol.slice(s![.., ..n]).to_owned());
            let norm = fro(&sol.slice(s![.., n..]).to_owned());
            xh = next;
            if let Some(t) = mon.record(step, relative(diff, norm)) {
                term = t;
                break;
            }
        } else {
            xh = next;
        }
    }
    let x = a2_lu.solve(xh.view(), SolveSide::Left)?;
    Ok((
        x,
        SolveReport {
            iterations_run: steps,
            increment_history: mon.history,
            terminated_by: term,
            wall_time: start.elapsed().as_secs_f64(),
        },
    ))
}

/// Factored ADI for a low-rank right-hand side, from a zero start.
pub fn fadi_solve(
    sys: &SylvesterSystem,
    shifts: &ShiftSchedule,
    eps: f64,
    tau: usize,
) -> Result<(LowRankSolution, SolveReport)> {
    let start = Instant::now();
    let n = sys.n();
    if tau == 0 {
        return Err(Error::InvalidArgument("check cadence must be >= 1".into()));
    }
    let rhs = match &sys.rhs {
        Rhs::LowRank(l) => l,
        Rhs::Dense(_) => return Err(Error::InvalidArgument("fADI needs a low-rank rhs".into())),
    };
    let r = rhs.rank();
    let plan = usable_shifts(shifts);
    if plan.is_empty() {
        return Err(Error::InvalidArgument("empty shift schedule".into()));
    }
    if plan.len() * r >= n {
        warn!("fADI with k r = {} >= n = {n}; dense ADI is cheaper", plan.len() * r);
    }
    let b2t = sys.b2.transpose();
    let mut zs: Vec<Array2<f64>> = Vec::new();
    let mut ys: Vec<Array2<f64>> = Vec::new();
    let mut d: Vec<f64> = Vec::new();
    // Gram blocks of the accumulated factors
    let mut gz: Vec<Vec<Array2<f64>>> = Vec::new();
    let mut gy: Vec<Vec<Array2<f64>>> = Vec::new();
    let mut mon = Monitor { eps, tau, history: Vec::new() };
    let mut term = Termination::ScheduleExhausted;
    let mut steps = 0;
    let mut prev: Option<(f64, f64)> = None;
    for (step, &(j, p, q)) in plan.iter().enumerate() {
        let step = step + 1;
        let ml = factor(sys.a1.add_scaled(&sys.a2, -p)?, j, SolveSide::Left)?;
        // N_q^{-T} is a left solve with N_q^T
        let nt = factor(sys.b1.add_scaled(&sys.b2, q)?.transpose(), j, SolveSide::Left)?;
        let (z, y) = match (prev, zs.last(), ys.last()) {
            (Some((pp, qp)), Some(zp), Some(yp)) => {
                let mut z = ml.solve(sys.a2.mul_dense(zp.view())?.view(), SolveSide::Left)?;
                z *= p - qp;
                z += zp;
                let mut y = nt.solve(b2t.mul_dense(yp.view())?.view(), SolveSide::Left)?;
                y *= pp - q;
                y += yp;
                (z, y)
            }
            _ => (
                ml.solve(rhs.u.view(), SolveSide::Left)?,
                nt.solve(rhs.v.view(), SolveSide::Left)?,
            ),
        };
        if z.iter().chain(y.iter()).any(|v| !v.is_finite()) {
            return Err(Error::Divergence { step });
        }
        let w = q - p;
        gz.push(zs.iter().chain(std::iter::once(&z)).map(|zi| zi.t().dot(&z)).collect());
        gy.push(ys.iter().chain(std::iter::once(&y)).map(|yi| yi.t().dot(&y)).collect());
        zs.push(z);
        ys.push(y);
        d.push(w);
        prev = Some((p, q));
        steps = step;
        let last = step == plan.len();
        if mon.due(step, last) {
            let k = zs.len() - 1;
            let inc2 = w * w * trace_prod(&gz[k][k], &gy[k][k]);
            // ||sum_i w_i Z_i Y_i^T||^2 = sum_{i,l} w_i w_l tr((Z_i^T Z_l)(Y_l^T Y_i))
            let mut tot2 = 0.0;
            for a in 0..=k {
                for b in 0..=k {
                    let (zab, yab) = if a <= b {
                        (gz[b][a].clone(), gy[b][a].clone())
                    } else {
                        (gz[a][b].t().to_owned(), gy[a][b].t().to_owned())
                    };
                    tot2 += d[a] * d[b] * trace_prod(&zab, &yab);
                }
            }
            let incr = relative(inc2.max(0.0).sqrt(), tot2.max(0.0).sqrt());
            if let Some(t) = mon.record(step, incr) {
                term = t;
                break;
            }
        }
    }
    let zv: Vec<_> = zs.iter().map(|a| a.view()).collect();
    let yv: Vec<_> = ys.iter().map(|a| a.view()).collect();
    let z = concatenate(Axis(1), &zv).map_err(|e| Error::Dimension(e.to_string()))?;
    let y = concatenate(Axis(1), &yv).map_err(|e| Error::Dimension(e.to_string()))?;
    let d = d.iter().flat_map(|w| std::iter::repeat_n(*w, r)).collect();
    Ok((
        LowRankSolution { z, y, d },
        SolveReport {
            iterations_run: steps,
            increment_history: mon.history,
            terminated_by: term,
            wall_time: start.elapsed().as_secs_f64(),
        },
    ))
}

/// `tr(G_z^T G_y)` for Gram blocks `G_z = Z_a^T Z_b`, `G_y = Y_a^T Y_b`.
fn trace_prod(gz: &Array2<f64>, gy: &Array2<f64>) -> f64 {
    gz.iter().zip(gy.iter()).map(|(a, b)| a * b).sum()
}
