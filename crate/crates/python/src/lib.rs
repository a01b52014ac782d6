//! Python bindings.

use std::path::Path;

use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;

use usadi::chebfun::Cheb2D;
use usadi::cli::parse_config;
use usadi::exprparse::parse;
use usadi::poisson::{solve_auto, DriverReport, Equation, ProblemSpec, RhsSpec, SolverKind};
use usadi::recomb::{BcKind, BoundarySpec, Side};
use usadi::zolotarev::ShiftOrder;

fn value_err(e: impl std::fmt::Display) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn solver_err(e: impl std::fmt::Display) -> PyErr {
    PyRuntimeError::new_err(e.to_string())
}

/// Chebyshev coefficients of a solution on [-1,1]^2.
#[pyclass(module = "pyusadi", frozen)]
struct Solution {
    coeffs: Cheb2D,
    report: DriverReport,
}

#[pymethods]
impl Solution {
    /// Coefficient rows (row i is the y-degree, column j the x-degree).
    #[getter]
    fn coefficients(&self) -> Vec<Vec<f64>> {
        self.coeffs.coeffs.rows().into_iter().map(|r| r.to_vec()).collect()
    }

    #[getter]
    fn shape(&self) -> (usize, usize) {
        self.coeffs.dim()
    }

    /// Truncation at which the solve was resolved.
    #[getter]
    fn final_n(&self) -> usize {
        self.report.final_n
    }

    /// Per-level driver report as JSON text.
    fn report_json(&self) -> PyResult<String> {
        serde_json::to_string(&self.report).map_err(solver_err)
    }

    /// Value at one point.
    fn __call__(&self, x: f64, y: f64) -> PyResult<f64> {
        Ok(self.coeffs.eval(&[(x, y)]).map_err(value_err)?[0])
    }

    /// Values at scattered points.
    fn eval(&self, xs: Vec<f64>, ys: Vec<f64>) -> PyResult<Vec<f64>> {
        if xs.len() != ys.len() {
            return Err(PyValueError::new_err("xs and ys differ in length"));
        }
        let pts: Vec<(f64, f64)> = xs.into_iter().zip(ys).collect();
        self.coeffs.eval(&pts).map_err(value_err)
    }

    /// Values on a tensor grid; rows follow ys, columns follow xs.
    fn eval_grid(&self, xs: Vec<f64>, ys: Vec<f64>) -> Vec<Vec<f64>> {
        let g = self.coeffs.eval_grid(&xs, &ys);
        g.rows().into_iter().map(|r| r.to_vec()).collect()
    }

    fn __repr__(&self) -> String {
        let (r, c) = self.coeffs.dim();
        format!("Solution(shape=({r}, {c}), final_n={})", self.report.final_n)
    }
}

fn boundary(side: Side, spec: (String, String, Option<f64>), name: &str) -> PyResult<BoundarySpec> {
    let (kind, value, theta) = spec;
    let kind = match (kind.as_str(), theta) {
        ("dirichlet", None) => BcKind::Dirichlet,
        ("neumann", None) => BcKind::Neumann,
        ("robin", Some(t)) => BcKind::Robin(t),
        ("robin", None) => return Err(PyValueError::new_err(format!("{name}: robin needs theta"))),
        (k, _) => return Err(PyValueError::new_err(format!("{name}: unsupported kind {k:?} with theta {theta:?}"))),
    };
    BoundarySpec::new(side, kind, parse(&value).map_err(value_err)?).map_err(value_err)
}

fn run(spec: ProblemSpec) -> PyResult<Solution> {
    let (coeffs, report) = solve_auto(&spec).map_err(solver_err)?;
    Ok(Solution { coeffs, report })
}

/// Solve a second-order problem on [-1,1]^2.
///
/// Each side takes (kind, value, theta) with kind one of "dirichlet",
/// "neumann", "robin"; theta is only for robin (u + theta * du/dn_coord).
/// With rho_x / rho_y the equation is u_xx + u_yy - rho_x(x) u - rho_y(y) u = f.
#[pyfunction]
#[pyo3(signature = (
    rhs,
    left = ("dirichlet".to_string(), "0".to_string(), None),
    right = ("dirichlet".to_string(), "0".to_string(), None),
    bottom = ("dirichlet".to_string(), "0".to_string(), None),
    top = ("dirichlet".to_string(), "0".to_string(), None),
    rho_x = None,
    rho_y = None,
    tolerance = 1e-13,
    max_n = 1024,
    solver = "adi",
))]
#[allow(clippy::too_many_arguments)]
fn solve(
    py: Python<'_>,
    rhs: &str,
    left: (String, String, Option<f64>),
    right: (String, String, Option<f64>),
    bottom: (String, String, Option<f64>),
    top: (String, String, Option<f64>),
    rho_x: Option<&str>,
    rho_y: Option<&str>,
    tolerance: f64,
    max_n: usize,
    solver: &str,
) -> PyResult<Solution> {
    let equation = if rho_x.is_some() || rho_y.is_some() {
        Equation::Separable {
            rho_x: parse(rho_x.unwrap_or("0")).map_err(value_err)?,
            rho_y: parse(rho_y.unwrap_or("0")).map_err(value_err)?,
        }
    } else {
        Equation::Poisson
    };
    let solver = match solver {
        "adi" => SolverKind::Adi,
        "fadi" => SolverKind::Fadi,
        "oracle" => SolverKind::Oracle,
        s => return Err(PyValueError::new_err(format!("unknown solver {s:?}"))),
    };
    let spec = ProblemSpec {
        equation,
        rhs: RhsSpec::Expr(parse(rhs).map_err(value_err)?),
        x_bcs: vec![boundary(Side::Left, left, "left")?, boundary(Side::Right, right, "right")?],
        y_bcs: vec![boundary(Side::Left, bottom, "bottom")?, boundary(Side::Right, top, "top")?],
        tolerance,
        max_n,
        solver,
        tau: 10,
    };
    spec.validate().map_err(value_err)?;
    py.detach(|| run(spec))
}

/// Solve the problem described by config-file text.
#[pyfunction]
fn solve_config(py: Python<'_>, text: &str) -> PyResult<Solution> {
    let cfg = parse_config(text, Path::new(".")).map_err(value_err)?;
    py.detach(|| run(cfg.problem))
}

/// Closed-form eigenvalue bounds of the degree-n second-order Dirichlet
/// pencil, as (lo, hi).
#[pyfunction]
fn dirichlet2_bounds(n: usize) -> PyResult<(f64, f64)> {
    if n < 4 || n % 2 != 0 {
        return Err(PyValueError::new_err("n must be even and >= 4"));
    }
    let b = usadi::spectra::dirichlet2_bounds(n);
    Ok((b.lo, b.hi))
}

/// Number of shifts for cross-ratio gamma and tolerance eps.
#[pyfunction]
fn shift_count(gamma: f64, eps: f64) -> usize {
    usadi::zolotarev::shift_count(gamma, eps)
}

/// Cross-ratio of the disjoint intervals [a, b] and [c, d].
#[pyfunction]
fn cross_ratio_gamma(a: f64, b: f64, c: f64, d: f64) -> PyResult<f64> {
    usadi::zolotarev::cross_ratio_gamma(a, b, c, d).map_err(value_err)
}

/// Zolotarev shifts (p, q) with p in [c, d] and q in [a, b].
#[pyfunction]
#[pyo3(signature = (a, b, c, d, k, order = "ascending"))]
fn zolotarev_shifts(a: f64, b: f64, c: f64, d: f64, k: usize, order: &str) -> PyResult<(Vec<f64>, Vec<f64>)> {
    let order = match order {
        "ascending" => ShiftOrder::Ascending,
        "descending" => ShiftOrder::Descending,
        o => return Err(PyValueError::new_err(format!("unknown order {o:?}"))),
    };
    let s = usadi::zolotarev::shifts(a, b, c, d, k, order).map_err(value_err)?;
    Ok((s.p, s.q))
}

/// Module initializer, also usable to populate a module object directly.
#[pymodule]
pub fn pyusadi(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<Solution>()?;
    m.add_function(wrap_pyfunction!(solve, m)?)?;
    m.add_function(wrap_pyfunction!(solve_config, m)?)?;
    m.add_function(wrap_pyfunction!(dirichlet2_bounds, m)?)?;
    m.add_function(wrap_pyfunction!(shift_count, m)?)?;
    m.add_function(wrap_pyfunction!(cross_ratio_gamma, m)?)?;
    m.add_function(wrap_pyfunction!(zolotarev_shifts, m)?)?;
    Ok(())
}
