//! Boundary functionals and banded basis-recombination operators.
//!
//! Column `k` of a transform holds the Chebyshev coefficients (rows
//! `k..=k+N`) of the `k`-th recombined basis function, which satisfies all
//! `N` homogeneous boundary conditions.

use std::fmt;

use crate::banded::BandedMatrix;
use crate::error::{Error, Result};
use crate::exprparse::Expr;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Side {
    /// The endpoint -1.
    Left,
    /// The endpoint +1.
    Right,
}

impl Side {
    pub fn point(self) -> f64 {
        match self {
            Side::Left => -1.0,
            Side::Right => 1.0,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum BcKind {
    Dirichlet,
    Neumann,
    /// `u + theta u'` at the endpoint.
    Robin(f64),
}

/// A boundary functional `B` acting on functions of one variable.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Functional {
    pub side: Side,
    pub kind: BcKind,
}

impl Functional {
    pub fn new(side: Side, kind: BcKind) -> Result<Self> {
        if let BcKind::Robin(theta) = kind {
            if !theta.is_finite() || theta == 0.0 {
                return Err(Error::InvalidArgument(format!(
                    "robin theta must be finite and nonzero, got {theta}"
                )));
            }
        }
        Ok(Functional { side, kind })
    }

    pub fn dirichlet(side: Side) -> Self {
        Functional { side, kind: BcKind::Dirichlet }
    }

    pub fn neumann(side: Side) -> Self {
        Functional { side, kind: BcKind::Neumann }
    }

    /// `B(T_i)`.
    pub fn row(&self, i: usize) -> f64 {
        let sq = (i * i) as f64;
        let sign = if i % 2 == 0 { 1.0 } else { -1.0 };
        match (self.side, self.kind) {
            (Side::Right, BcKind::Dirichlet) => 1.0,
            (Side::Right, BcKind::Neumann) => sq,
            (Side::Right, BcKind::Robin(t)) => 1.0 + t * sq,
            (Side::Left, BcKind::Dirichlet) => sign,
            (Side::Left, BcKind::Neumann) => -sign * sq,
            (Side::Left, BcKind::Robin(t)) => sign * (1.0 - t * sq),
        }
    }

    /// `B` applied to `sum c_i T_i`.
    pub fn apply(&self, c: &[f64]) -> f64 {
        c.iter().enumerate().map(|(i, v)| self.row(i) * v).sum()
    }
}

impl fmt::Display for Functional {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let side = match self.side {
            Side::Left => "left",
            Side::Right => "right",
        };
        match self.kind {
            BcKind::Dirichlet => write!(f, "dirichlet-{side}"),
            BcKind::Neumann => write!(f, "neumann-{side}"),
            BcKind::Robin(t) => write!(f, "robin({t})-{side}"),
        }
    }
}

/// Boundary functional plus its data, an expression in `x` and `y`
/// evaluated on the boundary.
#[derive(Clone, Debug, PartialEq)]
pub struct BoundarySpec {
    pub side: Side,
    pub kind: BcKind,
    pub data: Expr,
}

impl BoundarySpec {
    pub fn new(side: Side, kind: BcKind, data: Expr) -> Result<Self> {
        Functional::new(side, kind)?;
        Ok(BoundarySpec { side, kind, data })
    }

    pub fn homogeneous(side: Side, kind: BcKind) -> Result<Self> {
        Self::new(side, kind, Expr::Num(0.0))
    }

    pub fn functional(&self) -> Functional {
        Functional { side: self.side, kind: self.kind }
    }
}

/// `B(T_i)` for a boundary spec.
pub fn boundary_row(b: &BoundarySpec, i: usize) -> f64 {
    b.functional().row(i)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ScalingRule {
    /// `v_k = 1`.
    UnitLeading,
    /// Scale so that `diag(D_N T) = 1`.
    DiagonalUnity,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum ClosedForm {
    /// Dirichlet at both ends.
    Dirichlet,
    /// Dirichlet left, Neumann right.
    NeumannRight,
    /// Dirichlet left, Robin right.
    RobinRight(f64),
    /// Dirichlet and Neumann at both ends.
    Clamped,
}

impl ClosedForm {
    pub fn constraints(self) -> Vec<Functional> {
        use Side::*;
        match self {
            ClosedForm::Dirichlet => vec![Functional::dirichlet(Left), Functional::dirichlet(Right)],
            ClosedForm::NeumannRight => vec![Functional::dirichlet(Left), Functional::neumann(Right)],
            ClosedForm::RobinRight(t) => vec![
                Functional::dirichlet(Left),
                Functional { side: Right, kind: BcKind::Robin(t) },
            ],
            ClosedForm::Clamped => vec![
                Functional::dirichlet(Left),
                Functional::dirichlet(Right),
                Functional::neumann(Left),
                Functional::neumann(Right),
            ],
        }
    }
}

/// Lower-triangular recombination operator with `n` columns and `n + N`
/// rows (the full, untruncated column content).
#[derive(Clone, Debug, PartialEq)]
pub struct TransformOp {
    pub matrix: BandedMatrix,
    pub constraints: Vec<Functional>,
    pub scaling: ScalingRule,
}

impl TransformOp {
    /// Number of recombined basis functions.
    pub fn ncols(&self) -> usize {
        self.matrix.ncols()
    }

    /// Number of constraints (lower bandwidth).
    pub fn order(&self) -> usize {
        self.constraints.len()
    }

    /// Square truncation `P_n T P_n^T`.
    pub fn square(&self) -> BandedMatrix {
        let n = self.ncols();
        self.matrix.truncate(n, n)
    }

    /// Rows padded with zeros (or truncated) to `rows`.
    pub fn padded(&self, rows: usize) -> BandedMatrix {
        self.matrix.resized(rows, self.ncols())
    }

    pub fn bc_id(&self) -> String {
        self.constraints
            .iter()
            .map(|c| c.to_string())
            .collect::<Vec<_>>()
            .join(",")
    }
}

fn diagonal_unity_entry(order: usize, k: usize) -> f64 {
    let fact: f64 = (1..order).map(|v| v as f64).product();
    1.0 / (2f64.powi(order as i32 - 1) * fact * (order + k) as f64)
}

/// Null vector of an `N x (N+1)` block by elimination with full pivoting.
fn null_vector(mut b: Vec<Vec<f64>>, column: usize) -> Result<Vec<f64>> {
    let rows = b.len();
    let cols = rows + 1;
    for r in b.iter_mut() {
        let s = r.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
        if s == 0.0 {
            return Err(Error::DegenerateConstraints { column });
        }
        r.iter_mut().for_each(|v| *v /= s);
    }
    let mut perm: Vec<usize> = (0..cols).collect();
    for p in 0..rows {
        let (mut bi, mut bj, mut best) = (p, p, 0.0);
        for (i, row) in b.iter().enumerate().skip(p) {
            for j in p..cols {
                let v = row[perm[j]].abs();
                if v > best {
                    best = v;
                    bi = i;
                    bj = j;
                }
            }
        }
        if best < 1e-13 {
            return Err(Error::DegenerateConstraints { column });
        }
        b.swap(p, bi);
        perm.swap(p, bj);
        let pc = perm[p];
        for i in p + 1..rows {
            let f = b[i][pc] / b[p][pc];
            if f != 0.0 {
                for j in 0..cols {
                    let v = b[p][j];
                    b[i][j] -= f * v;
                }
            }
        }
    }
    let mut v = vec![0.0; cols];
    v[perm[rows]] = 1.0;
    for p in (0..rows).rev() {
        let pc = perm[p];
        let mut s = 0.0;
        for j in p + 1..cols {
            s += b[p][perm[j]] * v[perm[j]];
        }
        v[pc] = -s / b[p][pc];
    }
    Ok(v)
}

/// Build the recombination operator for arbitrary local constraints.
pub fn build_transform(
    constraints: &[Functional],
    n: usize,
    scaling: ScalingRule,
) -> Result<TransformOp> {
    let nc = constraints.len();
    if nc == 0 {
        return Err(Error::InvalidArgument("no boundary constraints".into()));
    }
    if n <= nc {
        return Err(Error::InvalidArgument(format!(
            "truncation {n} must exceed the number of constraints {nc}"
        )));
    }
    let mut t = BandedMatrix::zeros(n + nc, n, nc, 0);
    for k in 0..n {
        let block: Vec<Vec<f64>> = constraints
            .iter()
            .map(|c| (0..=nc).map(|m| c.row(k + m)).collect())
            .collect();
        let v = null_vector(block, k)?;
        let (idx, target) = match scaling {
            ScalingRule::UnitLeading => (0, 1.0),
            ScalingRule::DiagonalUnity => (nc, diagonal_unity_entry(nc, k)),
        };
        let vmax = v.iter().fold(0.0_f64, |m, x| m.max(x.abs()));
        if v[idx].abs() <= 1e-13 * vmax {
            return Err(Error::DegenerateConstraints { column: k });
        }
        let s = target / v[idx];
        for (m, x) in v.iter().enumerate() {
            t.set(k + m, k, x * s);
        }
    }
    Ok(TransformOp {
        matrix: t,
        constraints: constraints.to_vec(),
        scaling,
    })
}

/// Printed closed forms: Dirichlet `(1, 0, -1)`, the Neumann and Robin
/// variants with diagonal-unity scaling, and the clamped fourth-order basis
/// with unit leading entry.
pub fn closed_form_transform(kind: ClosedForm, n: usize) -> Result<TransformOp> {
    let constraints = kind.constraints();
    let nc = constraints.len();
    if n <= nc {
        return Err(Error::InvalidArgument(format!(
            "truncation {n} must exceed the band {nc}"
        )));
    }
    let mut t = BandedMatrix::zeros(n + nc, n, nc, 0);
    let scaling = match kind {
        ClosedForm::Dirichlet | ClosedForm::Clamped => ScalingRule::UnitLeading,
        _ => ScalingRule::DiagonalUnity,
    };
    for k in 0..n {
        let kf = k as f64;
        let col: Vec<f64> = match kind {
            ClosedForm::Dirichlet => vec![1.0, 0.0, -1.0],
            ClosedForm::NeumannRight => {
                let q = 2.0 * kf * kf + 2.0 * kf + 1.0;
                let t = -(2.0 * kf * kf + 6.0 * kf + 5.0) / (2.0 * (kf + 2.0) * q);
                let s = -2.0 * (kf + 1.0) / ((kf + 2.0) * q);
                vec![t, s, 1.0 / (2.0 * kf + 4.0)]
            }
            ClosedForm::RobinRight(th) => {
                let q = 2.0 * th * kf * kf + 2.0 * th * kf + th + 2.0;
                if q == 0.0 {
                    return Err(Error::InvalidArgument(format!(
                        "robin theta {th} makes the column {k} denominator vanish"
                    )));
                }
                let t = -(2.0 * th * kf * kf + 6.0 * th * kf + 5.0 * th + 2.0)
                    / (2.0 * (kf + 2.0) * q);
                let s = -2.0 * (th + th * kf) / ((kf + 2.0) * q);
                vec![t, s, 1.0 / (2.0 * kf + 4.0)]
            }
            ClosedForm::Clamped => vec![
                1.0,
                0.0,
                -2.0 * (kf + 2.0) / (kf + 3.0),
                0.0,
                (kf + 1.0) / (kf + 3.0),
            ],
        };
        for (m, x) in col.into_iter().enumerate() {
            t.set(k + m, k, x);
        }
    }
    Ok(TransformOp {
        matrix: t,
        constraints,
        scaling,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::usops::diff_op_rect;
    use proptest::prelude::*;

    fn col(t: &TransformOp, k: usize) -> Vec<f64> {
        (0..t.matrix.nrows()).map(|i| t.matrix.get(i, k)).collect()
    }

    fn cosine(a: &[f64], b: &[f64]) -> f64 {
        let dot: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
        let na: f64 = a.iter().map(|x| x * x).sum::<f64>().sqrt();
        let nb: f64 = b.iter().map(|x| x * x).sum::<f64>().sqrt();
        dot / (na * nb)
    }

    fn assert_bcs(t: &TransformOp, tol: f64) {
        for k in 0..t.ncols() {
            let c = col(t, k);
            let scale = c.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
            for f in &t.constraints {
                let r = f.apply(&c) / scale;
                assert!(r.abs() < tol, "{} column {k}: residual {r}", f);
            }
        }
    }

    #[test]
    fn rows_match_endpoint_values() {
        use Side::*;
        assert_eq!(Functional::dirichlet(Left).row(3), -1.0);
        assert_eq!(Functional::neumann(Right).row(4), 16.0);
        let robin = Functional::new(Right, BcKind::Robin(1.0)).unwrap();
        assert_eq!(robin.row(2), 5.0);
        assert_eq!(Functional::neumann(Left).row(3), 9.0);
        let rl = Functional::new(Left, BcKind::Robin(0.5)).unwrap();
        // T_3(-1) + 0.5 T_3'(-1) = -1 + 0.5 * 9
        assert_eq!(rl.row(3), 3.5);
        assert!(Functional::new(Left, BcKind::Robin(0.0)).is_err());
        let b = BoundarySpec::homogeneous(Left, BcKind::Dirichlet).unwrap();
        assert_eq!(boundary_row(&b, 3), -1.0);
    }

    #[test]
    fn dirichlet_unit_leading_is_td() {
        let t = build_transform(&ClosedForm::Dirichlet.constraints(), 8, ScalingRule::UnitLeading)
            .unwrap();
        let td = closed_form_transform(ClosedForm::Dirichlet, 8).unwrap();
        for k in 0..8 {
            let (a, b) = (col(&t, k), col(&td, k));
            for (x, y) in a.iter().zip(&b) {
                assert!((x - y).abs() < 1e-15);
            }
        }
        assert_eq!((t.matrix.lower(), t.matrix.upper()), (2, 0));
    }

    #[test]
    fn neumann_right_column_zero() {
        let t = build_transform(
            &ClosedForm::NeumannRight.constraints(),
            6,
            ScalingRule::DiagonalUnity,
        )
        .unwrap();
        let c = col(&t, 0);
        for (x, y) in c[..3].iter().zip([-5.0 / 4.0, -1.0, 1.0 / 4.0]) {
            assert!((x - y).abs() < 1e-15, "{x} vs {y}");
        }
    }

    #[test]
    fn closed_form_neumann_k1() {
        let t = closed_form_transform(ClosedForm::NeumannRight, 5).unwrap();
        let c = col(&t, 1);
        assert!((c[1] + 13.0 / 30.0).abs() < 1e-15);
        assert!((c[2] + 4.0 / 15.0).abs() < 1e-15);
        assert!((c[3] - 1.0 / 6.0).abs() < 1e-15);
    }

    #[test]
    fn clamped_columns() {
        let t = build_transform(&ClosedForm::Clamped.constraints(), 8, ScalingRule::UnitLeading)
            .unwrap();
        let tf = closed_form_transform(ClosedForm::Clamped, 8).unwrap();
        for k in 0..8 {
            let kf = k as f64;
            let expect = [1.0, 0.0, -2.0 * (kf + 2.0) / (kf + 3.0), 0.0, (kf + 1.0) / (kf + 3.0)];
            let c = col(&t, k);
            for m in 0..5 {
                assert!((c[k + m] - expect[m]).abs() < 1e-14);
            }
            assert_eq!(col(&tf, k)[k..k + 5].to_vec(), expect.to_vec());
        }
        let c1 = col(&tf, 1);
        assert_eq!(c1[1..6].to_vec(), vec![1.0, 0.0, -1.5, 0.0, 0.5]);
    }

    #[test]
    fn robin_denominator_error() {
        // 2 theta k^2 + 2 theta k + theta + 2 = 0 at k = 0 for theta = -2
        assert!(closed_form_transform(ClosedForm::RobinRight(-2.0), 4).is_err());
    }

    #[test]
    fn degenerate_constraints() {
        let c = [Functional::dirichlet(Side::Left), Functional::dirichlet(Side::Left)];
        assert_eq!(
            build_transform(&c, 5, ScalingRule::UnitLeading).unwrap_err(),
            Error::DegenerateConstraints { column: 0 }
        );
        assert!(build_transform(&c[..1], 1, ScalingRule::UnitLeading).is_err());
    }

    #[test]
    fn closed_forms_satisfy_bcs_and_match_built() {
        for kind in [
            ClosedForm::Dirichlet,
            ClosedForm::NeumannRight,
            ClosedForm::RobinRight(1.0),
            ClosedForm::RobinRight(0.3),
            ClosedForm::Clamped,
        ] {
            let cf = closed_form_transform(kind, 64).unwrap();
            assert_bcs(&cf, 1e-11);
            let built = build_transform(&kind.constraints(), 64, cf.scaling).unwrap();
            for k in 0..64 {
                let c = cosine(&col(&cf, k), &col(&built, k));
                assert!((c - 1.0).abs() < 1e-12, "{kind:?} col {k}: cos {c}");
            }
        }
    }

    #[test]
    fn diagonal_unity_normalization() {
        for kind in [ClosedForm::NeumannRight, ClosedForm::RobinRight(1.0)] {
            for t in [
                closed_form_transform(kind, 40).unwrap(),
                build_transform(&kind.constraints(), 40, ScalingRule::DiagonalUnity).unwrap(),
            ] {
                let d2 = diff_op_rect(2, 40, 42).unwrap();
                let p = d2.matmul(&t.matrix).unwrap();
                for k in 0..40 {
                    assert!((p.get(k, k) - 1.0).abs() < 1e-13);
                }
            }
        }
        let tf = build_transform(&ClosedForm::Clamped.constraints(), 20, ScalingRule::DiagonalUnity)
            .unwrap();
        let d4 = diff_op_rect(4, 20, 24).unwrap();
        let p = d4.matmul(&tf.matrix).unwrap();
        for k in 0..20 {
            assert!((p.get(k, k) - 1.0).abs() < 1e-13);
        }
    }

    #[test]
    fn square_and_padded_views() {
        let t = closed_form_transform(ClosedForm::Dirichlet, 6).unwrap();
        assert_eq!(t.matrix.dim(), (8, 6));
        assert_eq!(t.square().dim(), (6, 6));
        assert_eq!(t.square().get(5, 4), 0.0);
        assert_eq!(t.padded(10).get(7, 5), -1.0);
        assert_eq!(t.bc_id(), "dirichlet-left,dirichlet-right");
    }

    fn arb_functional() -> impl Strategy<Value = Functional> {
        let side = prop_oneof![Just(Side::Left), Just(Side::Right)];
        let kind = prop_oneof![
            Just(BcKind::Dirichlet),
            Just(BcKind::Neumann),
            (0.05f64..5.0).prop_map(BcKind::Robin),
        ];
        (side, kind).prop_map(|(side, kind)| Functional { side, kind })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]

        /// One condition at each end, any kinds.
        #[test]
        fn prop_columns_annihilate(a in arb_functional(), b in arb_functional(), n in 4usize..80) {
            let left = Functional { side: Side::Left, ..a };
            let right = Functional { side: Side::Right, ..b };
            // Neumann at both ends leaves constants free, so column 0 has no T_2 term
            prop_assume!(!(a.kind == BcKind::Neumann && b.kind == BcKind::Neumann));
            let t = build_transform(&[left, right], n, ScalingRule::DiagonalUnity).unwrap();
            {
                for k in 0..n {
                    let c = col(&t, k);
                    let scale = c.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
                    for f in &t.constraints {
                        prop_assert!((f.apply(&c) / scale).abs() < 1e-11);
                    }
                    for i in 0..t.matrix.nrows() {
                        if i < k || i > k + 2 {
                            prop_assert_eq!(t.matrix.get(i, k), 0.0);
                        }
                    }
                }
            }
        }
    }
}
