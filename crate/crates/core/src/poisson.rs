//! Problem assembly, boundary lifting and the adaptive doubling driver.

use std::time::Instant;

use log::{debug, info};
use ndarray::{s, Array2, ArrayView2, Axis};
use serde::{Deserialize, Serialize};

use crate::adi::{adi_solve, fadi_solve, warm_restart, LowRankRhs, Rhs, SolveReport, SylvesterSystem};
use crate::banded::{BandedLu, BandedMatrix};
use crate::chebfun::{adaptive_1d, cheb_points, cheb_transform_2d_try, diff_coeffs, is_resolved, resize, Cheb2D};
use crate::error::{Error, Result};
use crate::exprparse::Expr;
use crate::oracle::kron_solve;
use crate::recomb::{build_transform, BcKind, BoundarySpec, Functional, ScalingRule, Side, TransformOp};
use crate::spectra::{
    clamped4_interval, dirichlet2_interval, empirical_interval, reciprocal_interval, shifted_interval,
    SpectralInterval,
};
use crate::usops::{chop, conv_chain_rect, diff_op_rect, mult_op_rect};
use crate::zolotarev::{cross_ratio_gamma, shift_count, shifts, ShiftOrder, ShiftSchedule};

pub const START_N: usize = 16;
const DATA_TOL: f64 = 1e-16;
const DATA_MAX_LEN: usize = 1 << 16;
const EMPIRICAL_ITERS: usize = 20_000;

#[derive(Clone, Debug, PartialEq)]
pub enum Equation {
    Poisson,
    /// `u_xx + u_yy - rho_x(x) u - rho_y(y) u = f`.
    Separable { rho_x: Expr, rho_y: Expr },
    /// `u_xxxx + u_yyyy = f`.
    BiharmonicDiag,
}

impl Equation {
    pub fn order(&self) -> usize {
        match self {
            Equation::BiharmonicDiag => 4,
            _ => 2,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum RhsSpec {
    Expr(Expr),
    Coeffs(Cheb2D),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SolverKind {
    Adi,
    Fadi,
    Oracle,
}

/// Boundary conditions are split by normal direction: `x_bcs` sit on
/// `x = -1` (`Side::Left`) and `x = 1`, `y_bcs` on `y = -1` and `y = 1`.
/// Data expressions are evaluated on the boundary itself.
#[derive(Clone, Debug, PartialEq)]
pub struct ProblemSpec {
    pub equation: Equation,
    pub rhs: RhsSpec,
    pub x_bcs: Vec<BoundarySpec>,
    pub y_bcs: Vec<BoundarySpec>,
    pub tolerance: f64,
    pub max_n: usize,
    pub solver: SolverKind,
    /// Increment check cadence.
    pub tau: usize,
}

impl ProblemSpec {
    /// Homogeneous Dirichlet Poisson problem.
    pub fn dirichlet_poisson(rhs: Expr) -> Self {
        let d = |side| BoundarySpec::homogeneous(side, BcKind::Dirichlet).expect("dirichlet is valid");
        ProblemSpec {
            equation: Equation::Poisson,
            rhs: RhsSpec::Expr(rhs),
            x_bcs: vec![d(Side::Left), d(Side::Right)],
            y_bcs: vec![d(Side::Left), d(Side::Right)],
            tolerance: 1e-13,
            max_n: 1024,
            solver: SolverKind::Adi,
            tau: 10,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.tolerance > 1e-15 && self.tolerance < 1.0) {
            return Err(Error::InvalidArgument(format!(
                "tolerance {} outside (1e-15, 1)",
                self.tolerance
            )));
        }
        if self.max_n < START_N || !self.max_n.is_power_of_two() {
            return Err(Error::InvalidArgument(format!(
                "max_n {} must be a power of two >= {START_N}",
                self.max_n
            )));
        }
        if self.tau == 0 {
            return Err(Error::InvalidArgument("tau must be >= 1".into()));
        }
        for bcs in [&self.x_bcs, &self.y_bcs] {
            check_bcs(bcs, self.equation.order())?;
        }
        Ok(())
    }
}

fn check_bcs(bcs: &[BoundarySpec], order: usize) -> Result<()> {
    let count = |side, kind: fn(&BcKind) -> bool| bcs.iter().filter(|b| b.side == side && kind(&b.kind)).count();
    match order {
        2 => {
            if bcs.len() != 2 || count(Side::Left, |_| true) != 1 || count(Side::Right, |_| true) != 1 {
                return Err(Error::Unsupported(
                    "second-order problems need one condition per side".into(),
                ));
            }
        }
        _ => {
            let dir = |k: &BcKind| *k == BcKind::Dirichlet;
            let neu = |k: &BcKind| *k == BcKind::Neumann;
            let ok = bcs.len() == 4
                && [Side::Left, Side::Right]
                    .iter()
                    .all(|&s| count(s, dir) == 1 && count(s, neu) == 1);
            if !ok {
                return Err(Error::Unsupported(
                    "fourth-order problems need Dirichlet and Neumann data on every side".into(),
                ));
            }
        }
    }
    Ok(())
}

fn functionals(bcs: &[BoundarySpec]) -> Vec<Functional> {
    bcs.iter().map(|b| b.functional()).collect()
}

/// Chebyshev coefficients of a one-variable expression on `[-1, 1]`.
fn expand_1d(f: impl Fn(f64) -> Result<f64>) -> Result<Vec<f64>> {
    adaptive_1d(f, DATA_TOL, DATA_MAX_LEN)
}

/// One direction's truncated operators.
#[derive(Clone, Debug)]
pub struct DirectionOps {
    pub transform: TransformOp,
    /// `P_n S T P_n^T`.
    pub conv: BandedMatrix,
    /// `P_n (D - S M[rho]) T P_n^T`.
    pub op: BandedMatrix,
}

pub fn direction_ops(bcs: &[Functional], order: usize, rho: Option<&[f64]>, n: usize) -> Result<DirectionOps> {
    let t = build_transform(bcs, n, ScalingRule::DiagonalUnity)?;
    let rows = t.matrix.nrows();
    let conv = conv_chain_rect(order, n, rows)?.matmul(&t.matrix)?;
    let mut op = diff_op_rect(order, n, rows)?.matmul(&t.matrix)?;
    if let Some(rho) = rho {
        let l = n + 2 * order + rho.len();
        let m = mult_op_rect(rho, l, l)?;
        let smt = conv_chain_rect(order, n, l)?.matmul(&m)?.matmul(&t.matrix.resized(l, n))?;
        op = op.add_scaled(&smt, -1.0)?;
    }
    Ok(DirectionOps { transform: t, conv, op })
}

/// Blend polynomials `phi_i` with `B_k phi_i = delta_ik`: interpolation in
/// `T_0..T_{N-1}` when that is nonsingular, else minimum norm in
/// `T_0..T_{N+1}`.
fn blend_basis(bcs: &[Functional]) -> Result<Vec<Vec<f64>>> {
    let nb = bcs.len();
    let square = Array2::from_shape_fn((nb, nb), |(i, k)| bcs[i].row(k));
    if let Ok(lu) = BandedLu::new(&BandedMatrix::from_dense(square.view(), nb - 1, nb - 1)) {
        let phi: Vec<Vec<f64>> = (0..nb)
            .map(|i| {
                let mut e = vec![0.0; nb];
                e[i] = 1.0;
                lu.solve_vec(&mut e);
                e
            })
            .collect();
        if phi.iter().flatten().all(|v| v.is_finite() && v.abs() < 1e6) {
            return Ok(phi);
        }
    }
    let width = nb + 2;
    let b = Array2::from_shape_fn((nb, width), |(i, k)| bcs[i].row(k));
    let gram = b.dot(&b.t());
    let lu = BandedLu::new(&BandedMatrix::from_dense(gram.view(), nb - 1, nb - 1))
        .map_err(|_| Error::DegenerateConstraints { column: 0 })?;
    let mut out = Vec::with_capacity(nb);
    for i in 0..nb {
        let mut e = vec![0.0; nb];
        e[i] = 1.0;
        lu.solve_vec(&mut e);
        out.push((0..width).map(|k| (0..nb).map(|r| b[[r, k]] * e[r]).sum()).collect());
    }
    Ok(out)
}

fn outer(col: &[f64], row: &[f64]) -> Array2<f64> {
    Array2::from_shape_fn((col.len(), row.len()), |(i, j)| col[i] * row[j])
}

fn add_into(acc: &mut Array2<f64>, term: &Array2<f64>, s: f64) {
    let (r, c) = term.dim();
    let (ar, ac) = acc.dim();
    if r > ar || c > ac {
        let mut grown = Array2::zeros((ar.max(r), ac.max(c)));
        grown.slice_mut(s![..ar, ..ac]).assign(acc);
        *acc = grown;
    }
    acc.slice_mut(s![..r, ..c]).scaled_add(s, term);
}

/// Apply a 1D coefficient map to every row (`x`) or column (`y`).
fn map_axis(c: &Array2<f64>, axis: Axis, f: impl Fn(&[f64]) -> Vec<f64>) -> Array2<f64> {
    let lanes: Vec<Vec<f64>> = c.lanes(axis).into_iter().map(|l| f(&l.to_vec())).collect();
    let len = lanes.iter().map(|v| v.len()).max().unwrap_or(0);
    match axis {
        Axis(1) => Array2::from_shape_fn((lanes.len(), len), |(i, j)| *lanes[i].get(j).unwrap_or(&0.0)),
        _ => Array2::from_shape_fn((len, lanes.len()), |(i, j)| *lanes[j].get(i).unwrap_or(&0.0)),
    }
}

fn diff_n(c: &[f64], k: usize) -> Vec<f64> {
    (0..k).fold(c.to_vec(), |acc, _| diff_coeffs(&acc))
}

fn multiply(c: &[f64], rho: &[f64]) -> Vec<f64> {
    let out = c.len() + rho.len() - 1;
    let m = mult_op_rect(rho, out, c.len()).expect("output holds the product");
    m.matvec(c)
}

/// Operator applied to a coefficient matrix, without truncation.
fn apply_operator(eq: &Equation, rho: &Option<(Vec<f64>, Vec<f64>)>, g: &Array2<f64>) -> Array2<f64> {
    let order = eq.order();
    let mut out = map_axis(g, Axis(1), |r| diff_n(r, order));
    add_into(&mut out, &map_axis(g, Axis(0), |c| diff_n(c, order)), 1.0);
    if let Some((rx, ry)) = rho {
        add_into(&mut out, &map_axis(g, Axis(1), |r| multiply(r, rx)), -1.0);
        add_into(&mut out, &map_axis(g, Axis(0), |c| multiply(c, ry)), -1.0);
    }
    out
}

/// Boundary lifting and the operator applied to it.
#[derive(Clone, Debug)]
pub struct Lifting {
    pub g: Cheb2D,
    pub lg: Array2<f64>,
}

fn boundary_data(b: &BoundarySpec, normal_x: bool) -> Result<Vec<f64>> {
    if b.data.is_zero() {
        return Ok(vec![0.0]);
    }
    let p = b.side.point();
    expand_1d(|t| if normal_x { b.data.eval(p, t) } else { b.data.eval(t, p) })
}

fn build_lifting(spec: &ProblemSpec, rho: &Option<(Vec<f64>, Vec<f64>)>) -> Result<Lifting> {
    let fx = functionals(&spec.x_bcs);
    let fy = functionals(&spec.y_bcs);
    let hx: Vec<Vec<f64>> = spec.x_bcs.iter().map(|b| boundary_data(b, true)).collect::<Result<_>>()?;
    let hy: Vec<Vec<f64>> = spec.y_bcs.iter().map(|b| boundary_data(b, false)).collect::<Result<_>>()?;
    if hx.iter().chain(&hy).all(|h| h.iter().all(|v| *v == 0.0)) {
        return Ok(Lifting { g: Cheb2D::zeros(1, 1), lg: Array2::zeros((1, 1)) });
    }
    let phi = blend_basis(&fx)?;
    let psi = blend_basis(&fy)?;
    let mut g = Array2::zeros((1, 1));
    for (h, p) in hx.iter().zip(&phi) {
        add_into(&mut g, &outer(h, p), 1.0);
    }
    for (h, p) in hy.iter().zip(&psi) {
        add_into(&mut g, &outer(p, h), 1.0);
    }
    // corner values, seen from both directions
    let scale = hx
        .iter()
        .chain(&hy)
        .flat_map(|h| h.iter())
        .fold(1.0_f64, |m, v| m.max(v.abs()));
    for (i, (h, p)) in hx.iter().zip(&phi).enumerate() {
        for (k, (ht, q)) in hy.iter().zip(&psi).enumerate() {
            let from_x = fy[k].apply(h);
            let from_y = fx[i].apply(ht);
            if (from_x - from_y).abs() > 1e-10 * scale {
                return Err(Error::CornerIncompatible {
                    x: fx[i].side.point(),
                    y: fy[k].side.point(),
                    lhs: from_x,
                    rhs: from_y,
                });
            }
            add_into(&mut g, &outer(q, p), -from_x);
        }
    }
    let lg = apply_operator(&spec.equation, rho, &g);
    Ok(Lifting { g: Cheb2D::new(g), lg })
}

/// Smallest `2^j + 1` not below `k`.
fn sample_count(k: usize) -> usize {
    let mut m = 17;
    while m < k {
        m = 2 * m - 1;
    }
    m
}

/// A problem with its one-time precomputation (multiplier and lifting
/// expansions).
#[derive(Clone, Debug)]
pub struct Prepared {
    pub spec: ProblemSpec,
    pub lifting: Lifting,
    rho: Option<(Vec<f64>, Vec<f64>)>,
    rho_ranges: Option<((f64, f64), (f64, f64))>,
}

fn rho_range(e: &Expr, in_x: bool) -> Result<(f64, f64)> {
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for t in cheb_points(257) {
        let v = if in_x { e.eval(t, 0.0)? } else { e.eval(0.0, t)? };
        lo = lo.min(v);
        hi = hi.max(v);
    }
    // widen outward by 5% of each end
    Ok((lo - 0.05 * lo.abs(), hi + 0.05 * hi.abs()))
}

pub fn prepare(spec: &ProblemSpec) -> Result<Prepared> {
    spec.validate()?;
    let (rho, rho_ranges) = match &spec.equation {
        Equation::Separable { rho_x, rho_y } => {
            if rho_x.uses(crate::exprparse::Var::Y) || rho_y.uses(crate::exprparse::Var::X) {
                return Err(Error::Unsupported("coefficients must be separable".into()));
            }
            let rx = chop(&expand_1d(|t| rho_x.eval(t, 0.0))?, 1e-16);
            let ry = chop(&expand_1d(|t| rho_y.eval(0.0, t))?, 1e-16);
            (Some((rx, ry)), Some((rho_range(rho_x, true)?, rho_range(rho_y, false)?)))
        }
        _ => (None, None),
    };
    let lifting = build_lifting(spec, &rho)?;
    Ok(Prepared { spec: spec.clone(), lifting, rho, rho_ranges })
}

pub fn lift_boundary(spec: &ProblemSpec, n: usize) -> Result<(Cheb2D, Cheb2D)> {
    let p = prepare(spec)?;
    let f = p.rhs_coeffs(n)?;
    Ok((p.lifting.g.clone(), Cheb2D::new(f)))
}

impl Prepared {
    pub fn order(&self) -> usize {
        self.spec.equation.order()
    }

    /// Chebyshev coefficients of `f - L g`, `k x k`.
    pub fn rhs_coeffs(&self, k: usize) -> Result<Array2<f64>> {
        let mut f = match &self.spec.rhs {
            RhsSpec::Expr(e) => {
                if e.is_zero() {
                    Array2::zeros((k, k))
                } else {
                    let m = sample_count(k);
                    let c = cheb_transform_2d_try(|x, y| e.eval(x, y), m, m)?;
                    resize(c.coeffs.view(), k, k)
                }
            }
            RhsSpec::Coeffs(c) => resize(c.coeffs.view(), k, k),
        };
        let lg = resize(self.lifting.lg.view(), k, k);
        f -= &lg;
        Ok(f)
    }

    pub fn directions(&self, n: usize) -> Result<(DirectionOps, DirectionOps)> {
        let order = self.order();
        let (rx, ry) = match &self.rho {
            Some((rx, ry)) => (Some(rx.as_slice()), Some(ry.as_slice())),
            None => (None, None),
        };
        let y = direction_ops(&functionals(&self.spec.y_bcs), order, ry, n)?;
        let x = direction_ops(&functionals(&self.spec.x_bcs), order, rx, n)?;
        Ok((y, x))
    }

    pub fn assemble(&self, n: usize) -> Result<SylvesterSystem> {
        let (y, x) = self.directions(n)?;
        Ok(self.assemble_with(n, &y, &x)?.0)
    }

    /// The system and the Chebyshev coefficients of `f - L g` it was built
    /// from.
    fn assemble_with(
        &self,
        n: usize,
        y: &DirectionOps,
        x: &DirectionOps,
    ) -> Result<(SylvesterSystem, Array2<f64>)> {
        let order = self.order();
        let k = n + 2 * order;
        let ft = self.rhs_coeffs(k)?;
        let sy = conv_chain_rect(order, n, k)?;
        let sx = conv_chain_rect(order, n, k)?;
        let f = sx.transpose().rmul_dense(sy.mul_dense(ft.view())?.view())?;
        let rhs = if self.spec.solver == SolverKind::Fadi {
            Rhs::LowRank(LowRankRhs::from_aca(f.view(), 1e-15)?)
        } else {
            Rhs::Dense(f)
        };
        let sys = SylvesterSystem::new(y.conv.clone(), x.conv.transpose(), y.op.clone(), x.op.transpose(), rhs)?
            .with_transforms(y.transform.clone(), x.transform.clone());
        Ok((sys, ft))
    }

    /// Eigenvalue interval of one direction's pencil `op v = lambda conv v`.
    fn interval(&self, d: &DirectionOps, bcs: &[BoundarySpec], n: usize, in_x: bool) -> Result<SpectralInterval> {
        let dirichlet = bcs.iter().all(|b| b.kind == BcKind::Dirichlet);
        match &self.spec.equation {
            Equation::BiharmonicDiag => clamped4_interval(n),
            eq => {
                let base = if dirichlet {
                    dirichlet2_interval(n)
                } else {
                    let plain = if matches!(eq, Equation::Separable { .. }) {
                        direction_ops(&functionals(bcs), 2, None, n)?
                    } else {
                        d.clone()
                    };
                    empirical_interval(&plain.op, &plain.conv, EMPIRICAL_ITERS)?
                };
                match self.rho_ranges {
                    Some((rx, ry)) => shifted_interval(&base, if in_x { rx } else { ry }),
                    None => Ok(base),
                }
            }
        }
    }

    /// Shift schedule for level `n`; also returns the two direction
    /// intervals `(y, x)`.
    pub fn schedule(
        &self,
        n: usize,
        y: &DirectionOps,
        x: &DirectionOps,
        order: ShiftOrder,
    ) -> Result<(ShiftSchedule, SpectralInterval, SpectralInterval)> {
        let iy = self.interval(y, &self.spec.y_bcs, n, false)?;
        let ix = self.interval(x, &self.spec.x_bcs, n, true)?;
        let ry = reciprocal_interval(&iy)?;
        let rx = reciprocal_interval(&ix)?.negated();
        let gamma = cross_ratio_gamma(ry.lo, ry.hi, rx.lo, rx.hi)?;
        let k = shift_count(gamma, self.spec.tolerance);
        Ok((shifts(ry.lo, ry.hi, rx.lo, rx.hi, k, order)?, iy, ix))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LevelReport {
    pub n: usize,
    pub y_interval: SpectralInterval,
    pub x_interval: SpectralInterval,
    pub shifts: usize,
    pub order: ShiftOrder,
    pub warm_start: bool,
    pub solve: SolveReport,
    pub resolved: bool,
    pub wall_time: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DriverReport {
    pub levels: Vec<LevelReport>,
    pub final_n: usize,
    pub wall_time: f64,
}

impl DriverReport {
    pub fn last(&self) -> Option<&LevelReport> {
        self.levels.last()
    }
}

/// Level data kept by the driver for tests and benchmarks.
#[derive(Clone, Debug)]
pub struct LevelSolution {
    pub system: SylvesterSystem,
    pub x: Array2<f64>,
    pub report: LevelReport,
    /// Trailing coefficients of the truncated right-hand side are negligible.
    pub rhs_resolved: bool,
}

/// Solve at one truncation.
pub fn solve_level(
    prep: &Prepared,
    n: usize,
    x0: Option<ArrayView2<f64>>,
    order: ShiftOrder,
) -> Result<LevelSolution> {
    let t0 = Instant::now();
    let (y, x) = prep.directions(n)?;
    let (sys, ft) = prep.assemble_with(n, &y, &x)?;
    let rhs_resolved = is_resolved(&Cheb2D::new(ft), resolution_tol(prep.spec.tolerance));
    let (sh, iy, ix) = prep.schedule(n, &y, &x, order)?;
    let eps = prep.spec.tolerance;
    let (xt, rep) = match prep.spec.solver {
        SolverKind::Adi => adi_solve(&sys, &sh, x0, eps, prep.spec.tau)?,
        SolverKind::Fadi => {
            let (lr, rep) = fadi_solve(&sys, &sh, eps, prep.spec.tau)?;
            (lr.reconstruct(), rep)
        }
        SolverKind::Oracle => {
            let s = Instant::now();
            let x = kron_solve(&sys)?;
            let rep = SolveReport {
                iterations_run: 0,
                increment_history: Vec::new(),
                terminated_by: crate::adi::Termination::Tolerance,
                wall_time: s.elapsed().as_secs_f64(),
            };
            (x, rep)
        }
    };
    let report = LevelReport {
        n,
        y_interval: iy,
        x_interval: ix,
        shifts: sh.len(),
        order,
        warm_start: x0.is_some(),
        solve: rep,
        resolved: false,
        wall_time: t0.elapsed().as_secs_f64(),
    };
    Ok(LevelSolution { system: sys, x: xt, report, rhs_resolved })
}

fn with_lifting(x: &Array2<f64>, g: &Cheb2D) -> Cheb2D {
    let mut c = x.clone();
    add_into(&mut c, &g.coeffs, 1.0);
    Cheb2D::new(c)
}

/// Tolerance used on trailing coefficients of the back-transformed
/// solution.
pub fn resolution_tol(eps: f64) -> f64 {
    (10.0 * eps).max(1e-14)
}

/// Adaptive doubling from `n = 16` until the solution is resolved.
pub fn solve_auto(spec: &ProblemSpec) -> Result<(Cheb2D, DriverReport)> {
    let prep = prepare(spec)?;
    solve_prepared(&prep)
}

pub fn solve_prepared(prep: &Prepared) -> Result<(Cheb2D, DriverReport)> {
    solve_detailed(prep).map(|(u, rep, _)| (u, rep))
}

/// Like [`solve_prepared`], also returning the final level's system and
/// recombined-basis iterate.
pub fn solve_detailed(prep: &Prepared) -> Result<(Cheb2D, DriverReport, LevelSolution)> {
    let t0 = Instant::now();
    let spec = &prep.spec;
    let mut levels = Vec::new();
    let mut prev: Option<Array2<f64>> = None;
    let mut n = START_N;
    loop {
        let x0 = match (&prev, spec.solver) {
            (Some(p), SolverKind::Adi) => Some(warm_restart(p.view(), n)?),
            _ => None,
        };
        let order = if x0.is_some() { ShiftOrder::Descending } else { ShiftOrder::Ascending };
        let mut lvl = solve_level(prep, n, x0.as_ref().map(|a| a.view()), order)?;
        let back = lvl.system.back_transform(lvl.x.view())?;
        let resolved =
            lvl.rhs_resolved && is_resolved(&Cheb2D::new(back.clone()), resolution_tol(spec.tolerance));
        lvl.report.resolved = resolved;
        info!(
            "n = {n}: {} shifts, {} iterations, {:?}, resolved = {resolved}",
            lvl.report.shifts, lvl.report.solve.iterations_run, lvl.report.solve.terminated_by
        );
        debug!("intervals y {:?} x {:?}", lvl.report.y_interval, lvl.report.x_interval);
        levels.push(lvl.report.clone());
        if resolved || 2 * n > spec.max_n {
            let u = with_lifting(&back, &prep.lifting.g);
            if !resolved {
                return Err(Error::Unresolved { max_n: spec.max_n, best: Box::new(u) });
            }
            let report = DriverReport { levels, final_n: n, wall_time: t0.elapsed().as_secs_f64() };
            return Ok((u, report, lvl));
        }
        prev = Some(lvl.x);
        n *= 2;
    }
}

/// Largest mismatch between the boundary functionals of `u` and the
/// prescribed data, over `samples` equispaced points per condition.
pub fn boundary_mismatch(spec: &ProblemSpec, u: &Cheb2D, samples: usize) -> Result<f64> {
    let c = &u.coeffs;
    let ux = Cheb2D::new(map_axis(c, Axis(1), diff_coeffs));
    let uy = Cheb2D::new(map_axis(c, Axis(0), diff_coeffs));
    let mut worst: f64 = 0.0;
    for (bcs, normal_x) in [(&spec.x_bcs, true), (&spec.y_bcs, false)] {
        let du = if normal_x { &ux } else { &uy };
        for b in bcs.iter() {
            let p = b.side.point();
            for i in 0..samples {
                let t = -1.0 + 2.0 * i as f64 / (samples.max(2) - 1) as f64;
                let pt = if normal_x { (p, t) } else { (t, p) };
                let v = u.eval(&[pt])?[0];
                let d = du.eval(&[pt])?[0];
                let got = match b.kind {
                    BcKind::Dirichlet => v,
                    BcKind::Neumann => d,
                    BcKind::Robin(th) => v + th * d,
                };
                let want = b.data.eval(pt.0, pt.1)?;
                worst = worst.max((got - want).abs());
            }
        }
    }
    Ok(worst)
}
