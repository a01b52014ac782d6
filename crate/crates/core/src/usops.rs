//! Ultraspherical differentiation, conversion and multiplication operators,
//! built directly into band storage.

use crate::banded::BandedMatrix;
use crate::error::{Error, Result};

fn diff_scale(order: usize) -> f64 {
    let fact: f64 = (1..order).map(|v| v as f64).product();
    2f64.powi(order as i32 - 1) * fact
}

/// `D_order`, Chebyshev coefficients to `C^(order)` coefficients of the
/// `order`-th derivative, truncated to `n x n`.
pub fn diff_op(order: usize, n: usize) -> Result<BandedMatrix> {
    diff_op_rect(order, n, n)
}

pub fn diff_op_rect(order: usize, nrows: usize, ncols: usize) -> Result<BandedMatrix> {
    if order == 0 {
        return Err(Error::InvalidArgument(
            "differentiation order must be >= 1 (use the identity for order 0)".into(),
        ));
    }
    let s = diff_scale(order);
    let mut d = BandedMatrix::zeros(nrows, ncols, 0, order);
    for i in 0..nrows {
        if i + order < ncols {
            d.set(i, i + order, s * (order + i) as f64);
        }
    }
    Ok(d)
}

/// `S_order`, `C^(order)` coefficients to `C^(order+1)` coefficients
/// (`order = 0` is the Chebyshev basis).
pub fn conv_op(order: usize, n: usize) -> BandedMatrix {
    conv_op_rect(order, n, n)
}

pub fn conv_op_rect(order: usize, nrows: usize, ncols: usize) -> BandedMatrix {
    let mut s = BandedMatrix::zeros(nrows, ncols, 0, 2);
    let l = order as f64;
    for i in 0..nrows {
        let fi = i as f64;
        let (d, u) = match (order, i) {
            (0, 0) => (1.0, -0.5),
            (0, _) => (0.5, -0.5),
            _ => (l / (l + fi), -l / (l + fi + 2.0)),
        };
        if i < ncols {
            s.set(i, i, d);
        }
        if i + 2 < ncols {
            s.set(i, i + 2, u);
        }
    }
    s
}

/// `S_{order-1} ... S_1 S_0`: Chebyshev to `C^(order)` coefficients.
pub fn conv_chain(order: usize, n: usize) -> Result<BandedMatrix> {
    conv_chain_rect(order, n, n)
}

/// Rectangular truncation of the conversion chain. The factors are upper
/// triangular, so truncating each factor keeps the product exact.
pub fn conv_chain_rect(order: usize, nrows: usize, ncols: usize) -> Result<BandedMatrix> {
    if order == 0 {
        return Err(Error::InvalidArgument("conversion chain needs order >= 1".into()));
    }
    let rows = |l: usize| if l + 1 == order { nrows } else { ncols };
    let mut acc = conv_op_rect(0, rows(0), ncols);
    for l in 1..order {
        acc = conv_op_rect(l, rows(l), ncols).matmul(&acc)?;
    }
    Ok(acc)
}

/// Drop trailing coefficients below `rel_tol * max|c|`. Keeps at least one.
pub fn chop(coeffs: &[f64], rel_tol: f64) -> Vec<f64> {
    let scale = coeffs.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
    let mut len = coeffs.len();
    while len > 1 && coeffs[len - 1].abs() <= rel_tol * scale {
        len -= 1;
    }
    coeffs[..len.max(1)].to_vec()
}

/// `M_0[rho]`: multiplication by `rho(x) = sum rho_l T_l(x)` in Chebyshev
/// coefficient space.
pub fn mult_op(rho: &[f64], n: usize) -> Result<BandedMatrix> {
    mult_op_rect(rho, n, n)
}

pub fn mult_op_rect(rho: &[f64], nrows: usize, ncols: usize) -> Result<BandedMatrix> {
    let m = rho.len();
    if m == 0 {
        return Err(Error::InvalidArgument("empty multiplier".into()));
    }
    if m > nrows.max(ncols) {
        return Err(Error::InvalidArgument(format!(
            "multiplier has {m} coefficients, exceeds truncation {}",
            nrows.max(ncols)
        )));
    }
    let bw = m - 1;
    let mut op = BandedMatrix::zeros(nrows, ncols, bw, bw);
    for k in 0..ncols {
        for (l, &a) in rho.iter().enumerate() {
            if a == 0.0 {
                continue;
            }
            let half = 0.5 * a;
            if l + k < nrows {
                op.add_at(l + k, k, half);
            }
            let r = l.abs_diff(k);
            if r < nrows {
                op.add_at(r, k, half);
            }
        }
    }
    Ok(op)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::testutil::max_diff;
    use ndarray::{s, Array2};
    use proptest::prelude::*;

    fn e(n: usize, k: usize) -> Vec<f64> {
        let mut v = vec![0.0; n];
        v[k] = 1.0;
        v
    }

    /// Power-basis coefficients of T_0..T_{n-1} (rows: k, cols: power).
    fn cheb_monomials(n: usize) -> Array2<f64> {
        let mut t = Array2::zeros((n, n));
        t[[0, 0]] = 1.0;
        if n > 1 {
            t[[1, 1]] = 1.0;
        }
        for k in 2..n {
            for p in 0..n {
                let up = if p > 0 { 2.0 * t[[k - 1, p - 1]] } else { 0.0 };
                t[[k, p]] = up - t[[k - 2, p]];
            }
        }
        t
    }

    /// Chebyshev coefficients of a power-basis polynomial, by peeling the
    /// leading term.
    fn to_cheb(power: &[f64]) -> Vec<f64> {
        let n = power.len();
        let t = cheb_monomials(n);
        let mut r = power.to_vec();
        let mut c = vec![0.0; n];
        for k in (0..n).rev() {
            let lead = r[k] / t[[k, k]];
            c[k] = lead;
            for p in 0..=k {
                r[p] -= lead * t[[k, p]];
            }
        }
        c
    }

    #[test]
    fn diff_entries() {
        let d2 = diff_op(2, 5).unwrap().to_dense();
        let mut expect = Array2::zeros((5, 5));
        expect[[0, 2]] = 4.0;
        expect[[1, 3]] = 6.0;
        expect[[2, 4]] = 8.0;
        assert_eq!(d2, expect);
        let d1 = diff_op(1, 4).unwrap().to_dense();
        assert_eq!((d1[[0, 1]], d1[[1, 2]], d1[[2, 3]]), (1.0, 2.0, 3.0));
        assert_eq!(d1.iter().filter(|v| **v != 0.0).count(), 3);
        assert!(diff_op(0, 4).is_err());
    }

    #[test]
    fn second_derivative_of_t3() {
        // T3'' = 24x = 6 C_1^(2)
        let d = diff_op(2, 6).unwrap();
        assert_eq!(d.matvec(&e(6, 3)), {
            let mut v = vec![0.0; 6];
            v[1] = 6.0;
            v
        });
    }

    #[test]
    fn conv_entries() {
        let s0 = conv_op(0, 4).to_dense();
        assert_eq!(
            s0.diag().to_vec(),
            vec![1.0, 0.5, 0.5, 0.5]
        );
        assert_eq!((s0[[0, 2]], s0[[1, 3]]), (-0.5, -0.5));
        // T2 = (U2 - U0)/2
        assert_eq!(conv_op(0, 3).matvec(&e(3, 2)), vec![-0.5, 0.0, 0.5]);
        let s1 = conv_op(1, 5).to_dense();
        assert_eq!(s1.diag().to_vec(), vec![1.0, 0.5, 1.0 / 3.0, 0.25, 0.2]);
        assert_eq!(s1[[0, 2]], -1.0 / 3.0);
    }

    #[test]
    fn chain_matches_dense_product() {
        assert_eq!(conv_chain(1, 6).unwrap(), conv_op(0, 6));
        let c2 = conv_chain(2, 8).unwrap();
        let expect = conv_op(1, 8).to_dense().dot(&conv_op(0, 8).to_dense());
        assert!(max_diff(&c2.to_dense(), &expect) < 1e-15);
        assert_eq!(c2.upper(), 4);
        for l in 1..5 {
            assert_eq!(conv_chain(l, 12).unwrap().matvec(&e(12, 0)), e(12, 0));
        }
    }

    #[test]
    fn rectangular_chain_is_block_of_large_chain() {
        let big = conv_chain(4, 30).unwrap().to_dense();
        let r = conv_chain_rect(4, 10, 18).unwrap().to_dense();
        assert!(max_diff(&r, &big.slice(s![..10, ..18]).to_owned()) < 1e-15);
        let r1 = conv_chain_rect(1, 5, 9).unwrap().to_dense();
        let big1 = conv_op(0, 9).to_dense();
        assert_eq!(r1, big1.slice(s![..5, ..9]).to_owned());
    }

    #[test]
    fn derivative_conversion_identities() {
        // D2 = E D1 and S1 D1 = E S0, with E the C^(1) -> C^(2) derivative
        let n = 32;
        let mut e12 = BandedMatrix::zeros(n, n, 0, 1);
        for i in 0..n - 1 {
            e12.set(i, i + 1, 2.0);
        }
        let d1 = diff_op(1, n).unwrap();
        let d2 = diff_op(2, n).unwrap().to_dense();
        let ed1 = e12.matmul(&d1).unwrap().to_dense();
        assert!(max_diff(
            &ed1.slice(s![..n - 2, ..]).to_owned(),
            &d2.slice(s![..n - 2, ..]).to_owned()
        ) < 1e-12);
        let lhs = conv_op(1, n).matmul(&d1).unwrap().to_dense();
        let rhs = e12.matmul(&conv_op(0, n)).unwrap().to_dense();
        assert!(max_diff(
            &lhs.slice(s![..n - 2, ..n - 2]).to_owned(),
            &rhs.slice(s![..n - 2, ..n - 2]).to_owned()
        ) < 1e-12);
    }

    #[test]
    fn mult_identity_and_x() {
        assert_eq!(mult_op(&[1.0], 6).unwrap(), BandedMatrix::identity(6));
        let mx = mult_op(&[0.0, 1.0], 5).unwrap().to_dense();
        assert_eq!(mx.column(0).to_vec(), vec![0.0, 1.0, 0.0, 0.0, 0.0]);
        assert_eq!(mx.column(2).to_vec(), vec![0.0, 0.5, 0.0, 0.5, 0.0]);
        assert!(mult_op(&[1.0; 7], 6).is_err());
    }

    #[test]
    fn mult_x2_t3_vs_polynomial_product() {
        // x^2 * T3 = x^2 (4x^3 - 3x) = 4x^5 - 3x^3
        let rho = to_cheb(&[0.0, 0.0, 1.0]);
        let m = mult_op(&rho, 8).unwrap();
        let got = m.matvec(&e(8, 3));
        let expect = to_cheb(&[0.0, 0.0, 0.0, -3.0, 0.0, 4.0, 0.0, 0.0]);
        for (g, x) in got.iter().zip(&expect) {
            assert!((g - x).abs() < 1e-14);
        }
    }

    #[test]
    fn chop_tail() {
        assert_eq!(chop(&[1.0, 0.5, 1e-17, 0.0], 1e-15), vec![1.0, 0.5]);
        assert_eq!(chop(&[0.0, 0.0], 1e-15), vec![0.0]);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]

        #[test]
        fn prop_mult_matches_polynomial_product(
            a in proptest::collection::vec(-1.0f64..1.0, 1..5),
            b in proptest::collection::vec(-1.0f64..1.0, 1..5),
        ) {
            let n = 12;
            let mut pa = a.clone();
            pa.resize(n, 0.0);
            let mut pb = b.clone();
            pb.resize(n, 0.0);
            let mut prod = vec![0.0; n];
            for (i, x) in a.iter().enumerate() {
                for (j, y) in b.iter().enumerate() {
                    prod[i + j] += x * y;
                }
            }
            let ca = to_cheb(&pa);
            let cb = to_cheb(&pb);
            let m = mult_op(&ca[..a.len()], n).unwrap();
            let got = m.matvec(&cb);
            let expect = to_cheb(&prod);
            for (g, x) in got.iter().zip(&expect) {
                prop_assert!((g - x).abs() < 1e-12);
            }
        }

        #[test]
        fn prop_operators_respect_band(n in 3usize..40, l in 1usize..5) {
            let d = diff_op(l, n).unwrap();
            prop_assert_eq!((d.lower(), d.upper()), (0, l.min(n - 1)));
            let c = conv_chain(l, n).unwrap();
            let dense = c.to_dense();
            for i in 0..n {
                for j in 0..n {
                    if j < i || j > i + 2 * l {
                        prop_assert_eq!(dense[[i, j]], 0.0);
                    }
                }
            }
        }
    }
}
