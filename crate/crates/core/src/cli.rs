//! Batch front end: config parsing, solve, and CSV/JSON output.

use std::fmt;
use std::fs;
use std::io::{BufWriter, Write};
use std::ops::Range;
use std::path::{Path, PathBuf};
use std::time::Instant;

use ndarray::Array2;
use serde::{Deserialize, Serialize};
use toml::Spanned;

use crate::chebfun::Cheb2D;
use crate::exprparse::{parse, Expr};
use crate::poisson::{
    boundary_mismatch, prepare, solve_detailed, solve_level, DriverReport, Equation, ProblemSpec, RhsSpec,
    SolverKind,
};
use crate::recomb::{BcKind, BoundarySpec, Side};
use crate::zolotarev::ShiftOrder;

pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_SOLVER: i32 = 3;
pub const DEFAULT_GRID: usize = 101;

/// A configuration problem, located by 1-based line number when known.
#[derive(Clone, Debug, PartialEq)]
pub struct ConfigError {
    pub line: Option<usize>,
    pub message: String,
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.line {
            Some(l) => write!(f, "config error at line {l}: {}", self.message),
            None => write!(f, "config error: {}", self.message),
        }
    }
}

impl std::error::Error for ConfigError {}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    equation: Spanned<RawEquation>,
    bc: Spanned<RawBcs>,
    solver: Option<RawSolver>,
    output: Option<RawOutput>,
    benchmark: Option<Spanned<RawBenchmark>>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawEquation {
    kind: Option<Spanned<String>>,
    rhs: Option<Spanned<String>>,
    rhs_terms: Option<Vec<(Spanned<String>, Spanned<String>)>>,
    rho_x: Option<Spanned<String>>,
    rho_y: Option<Spanned<String>>,
    exact: Option<Spanned<String>>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawBcs {
    left: Option<Spanned<RawBc>>,
    right: Option<Spanned<RawBc>>,
    bottom: Option<Spanned<RawBc>>,
    top: Option<Spanned<RawBc>>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawBc {
    kind: Spanned<String>,
    value: Option<Spanned<String>>,
    slope: Option<Spanned<String>>,
    theta: Option<Spanned<f64>>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSolver {
    method: Option<Spanned<String>>,
    tolerance: Option<Spanned<f64>>,
    max_n: Option<Spanned<i64>>,
    tau: Option<Spanned<i64>>,
    factor_rhs: Option<bool>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawOutput {
    dir: Option<String>,
    coefficients: Option<String>,
    grid: Option<String>,
    report: Option<String>,
    grid_size: Option<Spanned<i64>>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawBenchmark {
    sizes: Vec<i64>,
    tolerances: Option<Vec<f64>>,
    output: Option<String>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Outputs {
    pub coefficients: PathBuf,
    pub grid: PathBuf,
    pub report: PathBuf,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Benchmark {
    pub sizes: Vec<usize>,
    pub tolerances: Vec<f64>,
    pub output: PathBuf,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub problem: ProblemSpec,
    pub outputs: Outputs,
    /// Points per side of the evaluation grid.
    pub grid: usize,
    pub benchmark: Option<Benchmark>,
    /// Known solution, used for error reporting only.
    pub exact: Option<Expr>,
}

struct Ctx<'a> {
    src: &'a str,
}

impl Ctx<'_> {
    fn line(&self, span: Range<usize>) -> usize {
        let end = span.start.min(self.src.len());
        self.src[..end].bytes().filter(|&b| b == b'\n').count() + 1
    }

    fn err(&self, span: Range<usize>, message: impl Into<String>) -> ConfigError {
        ConfigError { line: Some(self.line(span)), message: message.into() }
    }

    fn expr(&self, key: &str, s: &Spanned<String>) -> Result<Expr, ConfigError> {
        parse(s.get_ref()).map_err(|e| self.err(s.span(), format!("{key}: {e}")))
    }
}

fn resolve(base: &Path, p: &str) -> PathBuf {
    let p = Path::new(p);
    if p.is_absolute() {
        p.to_path_buf()
    } else {
        base.join(p)
    }
}

/// Parse config text. Relative output paths are taken against `base`.
pub fn parse_config(src: &str, base: &Path) -> Result<RunConfig, ConfigError> {
    let ctx = Ctx { src };
    let raw: RawConfig = toml::from_str(src).map_err(|e| ConfigError {
        line: e.span().map(|s| ctx.line(s)),
        message: e.message().trim().to_string(),
    })?;

    let eq_span = raw.equation.span();
    let eq = raw.equation.into_inner();
    let kind = eq.kind.as_ref().map(|k| k.get_ref().as_str()).unwrap_or("poisson");
    let equation = match kind {
        "poisson" => Equation::Poisson,
        "biharmonic" => Equation::BiharmonicDiag,
        "separable" => {
            let get = |name: &str, v: &Option<Spanned<String>>| match v {
                Some(s) => ctx.expr(&format!("equation.{name}"), s),
                None => Ok(parse("0").expect("literal")),
            };
            if eq.rho_x.is_none() && eq.rho_y.is_none() {
                return Err(ctx.err(eq_span, "separable equation needs equation.rho_x or equation.rho_y"));
            }
            Equation::Separable { rho_x: get("rho_x", &eq.rho_x)?, rho_y: get("rho_y", &eq.rho_y)? }
        }
        other => {
            let span = eq.kind.as_ref().map(|k| k.span()).unwrap_or(eq_span.clone());
            return Err(ctx.err(span, format!("unknown equation.kind \"{other}\"")));
        }
    };
    if !matches!(equation, Equation::Separable { .. }) {
        if let Some(s) = eq.rho_x.as_ref().or(eq.rho_y.as_ref()) {
            return Err(ctx.err(s.span(), "rho_x/rho_y apply only to kind = \"separable\""));
        }
    }
    let rhs = match (&eq.rhs, &eq.rhs_terms) {
        (Some(s), None) => RhsSpec::Expr(ctx.expr("equation.rhs", s)?),
        (None, Some(terms)) => RhsSpec::Coeffs(rhs_from_terms(&ctx, terms)?),
        (Some(s), Some(_)) => {
            return Err(ctx.err(s.span(), "give either equation.rhs or equation.rhs_terms, not both"))
        }
        (None, None) => return Err(ctx.err(eq_span, "missing required key equation.rhs")),
    };
    let exact = eq.exact.as_ref().map(|s| ctx.expr("equation.exact", s)).transpose()?;

    let fourth = equation.order() == 4;
    let bc_span = raw.bc.span();
    let bcs = raw.bc.into_inner();
    let mut x_bcs = Vec::new();
    let mut y_bcs = Vec::new();
    for (name, raw_bc, side, in_x) in [
        ("left", &bcs.left, Side::Left, true),
        ("right", &bcs.right, Side::Right, true),
        ("bottom", &bcs.bottom, Side::Left, false),
        ("top", &bcs.top, Side::Right, false),
    ] {
        let b = raw_bc
            .as_ref()
            .ok_or_else(|| ctx.err(bc_span.clone(), format!("missing required table bc.{name}")))?;
        let specs = boundary(&ctx, name, b, side, fourth)?;
        if in_x {
            x_bcs.extend(specs);
        } else {
            y_bcs.extend(specs);
        }
    }
    if fourth {
        // Dirichlet rows first, then Neumann
        for v in [&mut x_bcs, &mut y_bcs] {
            v.sort_by_key(|b| (b.kind != BcKind::Dirichlet, b.side != Side::Left));
        }
    }

    let mut problem = ProblemSpec {
        equation,
        rhs,
        x_bcs,
        y_bcs,
        tolerance: 1e-13,
        max_n: 1024,
        solver: SolverKind::Adi,
        tau: 10,
    };
    let mut solver_line = None;
    if let Some(s) = &raw.solver {
        if let Some(m) = &s.method {
            solver_line = Some(m.span());
            problem.solver = match m.get_ref().as_str() {
                "adi" => SolverKind::Adi,
                "fadi" => SolverKind::Fadi,
                "oracle" => SolverKind::Oracle,
                other => return Err(ctx.err(m.span(), format!("unknown solver.method \"{other}\""))),
            };
        }
        if let Some(t) = &s.tolerance {
            let v = *t.get_ref();
            if !(v > 1e-15 && v < 1.0) {
                return Err(ctx.err(t.span(), format!("solver.tolerance {v} outside (1e-15, 1)")));
            }
            problem.tolerance = v;
        }
        if let Some(m) = &s.max_n {
            let v = *m.get_ref();
            if v < 16 || !(v as u64).is_power_of_two() {
                return Err(ctx.err(m.span(), format!("solver.max_n {v} must be a power of two >= 16")));
            }
            problem.max_n = v as usize;
        }
        if let Some(t) = &s.tau {
            if *t.get_ref() < 1 {
                return Err(ctx.err(t.span(), "solver.tau must be >= 1"));
            }
            problem.tau = *t.get_ref() as usize;
        }
    }
    let factor = raw.solver.as_ref().and_then(|s| s.factor_rhs).unwrap_or(false);
    if problem.solver == SolverKind::Fadi && matches!(problem.rhs, RhsSpec::Expr(_)) && !factor {
        return Err(ctx.err(
            solver_line.unwrap_or(eq_span),
            "solver.method = \"fadi\" needs low-rank data: give equation.rhs_terms, \
             or set solver.factor_rhs = true to factor the expression by cross approximation",
        ));
    }
    problem.validate().map_err(|e| ctx.err(bc_span, e.to_string()))?;

    let out = raw.output.unwrap_or(RawOutput {
        dir: None,
        coefficients: None,
        grid: None,
        report: None,
        grid_size: None,
    });
    let dir = resolve(base, out.dir.as_deref().unwrap_or("."));
    let outputs = Outputs {
        coefficients: resolve(&dir, out.coefficients.as_deref().unwrap_or("coefficients.csv")),
        grid: resolve(&dir, out.grid.as_deref().unwrap_or("grid.csv")),
        report: resolve(&dir, out.report.as_deref().unwrap_or("report.json")),
    };
    let grid = match &out.grid_size {
        Some(g) if *g.get_ref() < 2 => return Err(ctx.err(g.span(), "output.grid_size must be >= 2")),
        Some(g) => *g.get_ref() as usize,
        None => DEFAULT_GRID,
    };
    let benchmark = match raw.benchmark {
        None => None,
        Some(b) => {
            let span = b.span();
            let b = b.into_inner();
            if b.sizes.is_empty() || b.sizes.iter().any(|&n| n < 4) {
                return Err(ctx.err(span, "benchmark.sizes must be a non-empty list of sizes >= 4"));
            }
            let tolerances = b.tolerances.unwrap_or_else(|| vec![problem.tolerance]);
            if let Some(t) = tolerances.iter().find(|t| !(**t > 1e-15 && **t < 1.0)) {
                return Err(ctx.err(span, format!("benchmark tolerance {t} outside (1e-15, 1)")));
            }
            Some(Benchmark {
                sizes: b.sizes.iter().map(|&n| n as usize).collect(),
                tolerances,
                output: resolve(&dir, b.output.as_deref().unwrap_or("benchmark.csv")),
            })
        }
    };
    Ok(RunConfig { problem, outputs, grid, benchmark, exact })
}

fn boundary(
    ctx: &Ctx,
    name: &str,
    b: &Spanned<RawBc>,
    side: Side,
    fourth: bool,
) -> Result<Vec<BoundarySpec>, ConfigError> {
    let raw = b.get_ref();
    let data = |key: &str, v: &Option<Spanned<String>>| match v {
        Some(s) => ctx.expr(&format!("bc.{name}.{key}"), s),
        None => Ok(parse("0").expect("literal")),
    };
    let kind_span = raw.kind.span();
    let bad = |msg: String| Err(ctx.err(kind_span.clone(), msg));
    let make = |kind, e| BoundarySpec::new(side, kind, e).map_err(|err| ctx.err(kind_span.clone(), err.to_string()));
    match (raw.kind.get_ref().as_str(), fourth) {
        ("clamped", true) => Ok(vec![
            make(BcKind::Dirichlet, data("value", &raw.value)?)?,
            make(BcKind::Neumann, data("slope", &raw.slope)?)?,
        ]),
        (_, true) => bad(format!("bc.{name}.kind must be \"clamped\" for the biharmonic equation")),
        ("clamped", false) => bad(format!("bc.{name}.kind \"clamped\" needs equation.kind = \"biharmonic\"")),
        (k, false) => {
            if let Some(s) = &raw.slope {
                return Err(ctx.err(s.span(), format!("bc.{name}.slope applies only to clamped conditions")));
            }
            let kind = match k {
                "dirichlet" => BcKind::Dirichlet,
                "neumann" => BcKind::Neumann,
                "robin" => match &raw.theta {
                    Some(t) => BcKind::Robin(*t.get_ref()),
                    None => return Err(ctx.err(b.span(), format!("missing required key bc.{name}.theta"))),
                },
                other => return bad(format!("unknown bc.{name}.kind \"{other}\"")),
            };
            if k != "robin" {
                if let Some(t) = &raw.theta {
                    return Err(ctx.err(t.span(), format!("bc.{name}.theta applies only to robin conditions")));
                }
            }
            Ok(vec![make(kind, data("value", &raw.value)?)?])
        }
    }
}

/// Sum of products `f_i(x) g_i(y)` as a coefficient matrix.
fn rhs_from_terms(ctx: &Ctx, terms: &[(Spanned<String>, Spanned<String>)]) -> Result<Cheb2D, ConfigError> {
    use crate::chebfun::adaptive_1d;
    let mut acc = Array2::<f64>::zeros((1, 1));
    for (fx, gy) in terms {
        let ex = ctx.expr("equation.rhs_terms", fx)?;
        let ey = ctx.expr("equation.rhs_terms", gy)?;
        if ex.uses(crate::exprparse::Var::Y) || ey.uses(crate::exprparse::Var::X) {
            return Err(ctx.err(fx.span(), "rhs_terms entries are [f(x), g(y)] pairs"));
        }
        let cx = adaptive_1d(|t| ex.eval(t, 0.0), 1e-16, 1 << 16).map_err(|e| ctx.err(fx.span(), e.to_string()))?;
        let cy = adaptive_1d(|t| ey.eval(0.0, t), 1e-16, 1 << 16).map_err(|e| ctx.err(gy.span(), e.to_string()))?;
        let (r, c) = (acc.nrows().max(cy.len()), acc.ncols().max(cx.len()));
        let mut next = Array2::zeros((r, c));
        next.slice_mut(ndarray::s![..acc.nrows(), ..acc.ncols()]).assign(&acc);
        for (i, a) in cy.iter().enumerate() {
            for (j, b) in cx.iter().enumerate() {
                next[[i, j]] += a * b;
            }
        }
        acc = next;
    }
    Ok(Cheb2D::new(acc))
}

/// Residual and boundary checks of a finished solve.
#[derive(Clone, Debug, Serialize, PartialEq)]
pub struct CheckReport {
    /// `||A1 X B2 + A2 X B1 - F||_F / ||F||_F` at the final truncation.
    pub relative_residual: f64,
    pub residual_bound: f64,
    /// Largest boundary-data mismatch over 100 points per condition.
    pub boundary_error: f64,
    pub boundary_bound: f64,
    pub passed: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct RunReport {
    pub solver: SolverKind,
    pub tolerance: f64,
    pub coefficient_shape: (usize, usize),
    pub driver: DriverReport,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub max_grid_error: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub check: Option<CheckReport>,
    pub wall_time: f64,
}

#[derive(Clone, Copy, Debug, Default)]
pub struct RunOptions {
    pub oracle: bool,
    pub check: bool,
    pub quiet: bool,
}

#[derive(Debug)]
pub enum RunError {
    Config(ConfigError),
    Solver(crate::error::Error),
    Io(PathBuf, std::io::Error),
}

impl RunError {
    pub fn exit_code(&self) -> i32 {
        match self {
            RunError::Config(_) | RunError::Io(..) => EXIT_CONFIG,
            RunError::Solver(_) => EXIT_SOLVER,
        }
    }
}

impl fmt::Display for RunError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RunError::Config(e) => write!(f, "{e}"),
            RunError::Solver(e) => write!(f, "solver error: {e}"),
            RunError::Io(p, e) => write!(f, "cannot write {}: {e}", p.display()),
        }
    }
}

impl From<crate::error::Error> for RunError {
    fn from(e: crate::error::Error) -> Self {
        RunError::Solver(e)
    }
}

/// Shortest round-trip form is not fixed-width; 17 significant digits is.
fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

fn create(path: &Path) -> Result<BufWriter<fs::File>, RunError> {
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir).map_err(|e| RunError::Io(dir.to_path_buf(), e))?;
    }
    fs::File::create(path).map(BufWriter::new).map_err(|e| RunError::Io(path.to_path_buf(), e))
}

fn io<T>(path: &Path, r: std::io::Result<T>) -> Result<T, RunError> {
    r.map_err(|e| RunError::Io(path.to_path_buf(), e))
}

/// Coefficient matrix as CSV: row `i` is the `y`-degree, column `j` the
/// `x`-degree.
pub fn write_coefficients(path: &Path, c: &Cheb2D) -> Result<(), RunError> {
    let mut w = create(path)?;
    for row in c.coeffs.rows() {
        let line: Vec<String> = row.iter().map(|&v| fmt_f64(v)).collect();
        io(path, writeln!(w, "{}", line.join(",")))?;
    }
    io(path, w.flush())
}

pub fn grid_points(m: usize) -> Vec<f64> {
    (0..m).map(|i| -1.0 + 2.0 * i as f64 / (m - 1) as f64).collect()
}

/// Values on an `m x m` equispaced grid, `x` varying fastest.
pub fn write_grid(path: &Path, c: &Cheb2D, m: usize) -> Result<(), RunError> {
    let pts = grid_points(m);
    let vals = c.eval_grid(&pts, &pts);
    let mut w = create(path)?;
    io(path, writeln!(w, "x,y,u"))?;
    for (i, &y) in pts.iter().enumerate() {
        for (j, &x) in pts.iter().enumerate() {
            io(path, writeln!(w, "{},{},{}", fmt_f64(x), fmt_f64(y), fmt_f64(vals[[i, j]])))?;
        }
    }
    io(path, w.flush())
}

pub fn max_grid_error(c: &Cheb2D, exact: &Expr, m: usize) -> crate::error::Result<f64> {
    let pts = grid_points(m);
    let vals = c.eval_grid(&pts, &pts);
    let mut err: f64 = 0.0;
    for (i, &y) in pts.iter().enumerate() {
        for (j, &x) in pts.iter().enumerate() {
            err = err.max((vals[[i, j]] - exact.eval(x, y)?).abs());
        }
    }
    Ok(err)
}

/// Solve, write the three artifacts, and return the report.
pub fn run(cfg: &RunConfig, opts: RunOptions) -> Result<RunReport, RunError> {
    let t0 = Instant::now();
    let mut spec = cfg.problem.clone();
    if opts.oracle {
        spec.solver = SolverKind::Oracle;
        spec.max_n = spec.max_n.min(crate::oracle::KRON_LIMIT);
    }
    let prep = prepare(&spec)?;
    let (u, driver, last) = solve_detailed(&prep)?;
    let max_grid_error = cfg.exact.as_ref().map(|e| max_grid_error(&u, e, cfg.grid)).transpose()?;
    let check = if opts.check {
        let f = last.system.rhs.to_dense();
        let fnorm = f.iter().map(|v| v * v).sum::<f64>().sqrt().max(f64::MIN_POSITIVE);
        let relative_residual = last.system.residual(last.x.view())? / fnorm;
        let boundary_error = boundary_mismatch(&spec, &u, 100)?;
        let residual_bound = 10.0 * spec.tolerance;
        let boundary_bound = 10.0 * spec.tolerance * u.max_abs().max(1.0);
        Some(CheckReport {
            relative_residual,
            residual_bound,
            boundary_error,
            boundary_bound,
            passed: relative_residual <= residual_bound && boundary_error <= boundary_bound,
        })
    } else {
        None
    };
    write_coefficients(&cfg.outputs.coefficients, &u)?;
    write_grid(&cfg.outputs.grid, &u, cfg.grid)?;
    let report = RunReport {
        solver: spec.solver,
        tolerance: spec.tolerance,
        coefficient_shape: u.dim(),
        driver,
        max_grid_error,
        check,
        wall_time: t0.elapsed().as_secs_f64(),
    };
    let mut w = create(&cfg.outputs.report)?;
    io(&cfg.outputs.report, serde_json::to_writer_pretty(&mut w, &report).map_err(std::io::Error::other))?;
    io(&cfg.outputs.report, writeln!(w))?;
    io(&cfg.outputs.report, w.flush())?;
    Ok(report)
}

#[derive(Clone, Debug, Serialize, PartialEq)]
pub struct BenchRow {
    pub n: usize,
    pub tolerance: f64,
    pub wall_time: f64,
    pub iterations: usize,
    pub shifts: usize,
}

/// Fixed-size solves from a zero start, one per `(n, tolerance)` pair.
pub fn benchmark(cfg: &RunConfig, opts: RunOptions) -> Result<Vec<BenchRow>, RunError> {
    let b = cfg.benchmark.as_ref().ok_or_else(|| {
        RunError::Config(ConfigError { line: None, message: "--benchmark needs a [benchmark] table".into() })
    })?;
    let mut rows = Vec::new();
    for &tol in &b.tolerances {
        let mut spec = cfg.problem.clone();
        spec.tolerance = tol;
        if opts.oracle {
            spec.solver = SolverKind::Oracle;
        }
        let prep = prepare(&spec)?;
        for &n in &b.sizes {
            let t = Instant::now();
            let lvl = solve_level(&prep, n, None, ShiftOrder::Ascending)?;
            // include the basis change back to Chebyshev coefficients
            lvl.system.back_transform(lvl.x.view())?;
            let row = BenchRow {
                n,
                tolerance: tol,
                wall_time: t.elapsed().as_secs_f64(),
                iterations: lvl.report.solve.iterations_run,
                shifts: lvl.report.shifts,
            };
            if !opts.quiet {
                println!("n = {n}, tolerance = {tol:e}: {:.3} s, {} iterations", row.wall_time, row.iterations);
            }
            rows.push(row);
        }
    }
    let mut w = create(&b.output)?;
    io(&b.output, writeln!(w, "n,tolerance,wall_time,iterations,shifts"))?;
    for r in &rows {
        io(&b.output, writeln!(w, "{},{:e},{:e},{},{}", r.n, r.tolerance, r.wall_time, r.iterations, r.shifts))?;
    }
    io(&b.output, w.flush())?;
    Ok(rows)
}

pub fn load_config(path: &Path) -> Result<RunConfig, RunError> {
    let src = fs::read_to_string(path).map_err(|e| {
        RunError::Config(ConfigError { line: None, message: format!("cannot read {}: {e}", path.display()) })
    })?;
    let base = path.parent().unwrap_or(Path::new("."));
    parse_config(&src, base).map_err(RunError::Config)
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"
[equation]
rhs = "1"

[bc.left]
kind = "dirichlet"
[bc.right]
kind = "dirichlet"
[bc.bottom]
kind = "dirichlet"
[bc.top]
kind = "dirichlet"
"#;

    fn parse_str(s: &str) -> Result<RunConfig, ConfigError> {
        parse_config(s, Path::new("/tmp"))
    }

    #[test]
    fn minimal_config_is_valid() {
        let cfg = parse_str(MINIMAL).unwrap();
        assert_eq!(cfg.problem.equation, Equation::Poisson);
        assert_eq!(cfg.problem.x_bcs.len(), 2);
        assert!(cfg.problem.validate().is_ok());
        assert_eq!(cfg.grid, DEFAULT_GRID);
        assert_eq!(cfg.outputs.grid, PathBuf::from("/tmp/./grid.csv"));
    }

    #[test]
    fn robin_requires_theta() {
        let src = MINIMAL.replace("[bc.top]\nkind = \"dirichlet\"", "[bc.top]\nkind = \"robin\"\nvalue = \"x\"");
        let e = parse_str(&src).unwrap_err();
        assert!(e.message.contains("bc.top.theta"), "{e}");
        assert_eq!(e.line, Some(11));
    }

    #[test]
    fn fadi_with_expression_needs_opt_in() {
        let src = format!("{MINIMAL}\n[solver]\nmethod = \"fadi\"\n");
        let e = parse_str(&src).unwrap_err();
        assert!(e.message.contains("low-rank") && e.message.contains("factor_rhs"), "{e}");
        let ok = format!("{MINIMAL}\n[solver]\nmethod = \"fadi\"\nfactor_rhs = true\n");
        assert_eq!(parse_str(&ok).unwrap().problem.solver, SolverKind::Fadi);
        let terms = MINIMAL.replace("rhs = \"1\"", "rhs_terms = [[\"sin(x)\", \"exp(y)\"]]");
        let cfg = parse_str(&format!("{terms}\n[solver]\nmethod = \"fadi\"\n")).unwrap();
        let RhsSpec::Coeffs(c) = &cfg.problem.rhs else { panic!() };
        let v = c.eval(&[(0.3, -0.2)]).unwrap()[0];
        assert!((v - 0.3f64.sin() * (-0.2f64).exp()).abs() < 1e-14);
    }

    #[test]
    fn errors_carry_line_numbers() {
        let e = parse_str(&MINIMAL.replace("rhs = \"1\"", "rhs = \"1 +\"")).unwrap_err();
        assert_eq!(e.line, Some(3));
        let e = parse_str(&MINIMAL.replace("kind = \"dirichlet\"\n[bc.right]", "kind = \"dirichlet\"\ncolour = 1\n[bc.right]"))
            .unwrap_err();
        assert_eq!(e.line, Some(7), "{e}");
        assert!(e.message.contains("colour"));
        let e = parse_str(&MINIMAL.replace("[bc.top]\nkind = \"dirichlet\"", "")).unwrap_err();
        assert!(e.message.contains("bc.top"), "{e}");
        let e = parse_str(&format!("{MINIMAL}[solver]\nmax_n = 100\n")).unwrap_err();
        assert_eq!(e.line, Some(14));
    }

    #[test]
    fn biharmonic_needs_clamped() {
        let src = MINIMAL.replace("rhs = \"1\"", "kind = \"biharmonic\"\nrhs = \"1\"");
        assert!(parse_str(&src).unwrap_err().message.contains("clamped"));
        let src = src.replace("dirichlet", "clamped");
        let cfg = parse_str(&src).unwrap();
        assert_eq!(cfg.problem.x_bcs.len(), 4);
        assert_eq!(cfg.problem.x_bcs[0].kind, BcKind::Dirichlet);
        assert_eq!(cfg.problem.x_bcs[3].kind, BcKind::Neumann);
    }

    #[test]
    fn number_format_round_trips() {
        for v in [0.1, -1.0 / 3.0, 1e-300, 6.02214076e23, f64::MIN_POSITIVE] {
            let s = fmt_f64(v);
            assert_eq!(s.parse::<f64>().unwrap(), v);
            assert_eq!(s.trim_start_matches('-').split('e').next().unwrap().len(), 18);
        }
    }
}
