//! Small dense complex linear-algebra helpers on top of nalgebra.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64 as C64;

pub type CMat = DMatrix<C64>;
pub type CVec = DVector<C64>;

pub fn identity(n: usize) -> CMat {
    CMat::identity(n, n)
}

pub fn zero() -> C64 {
    C64::new(0.0, 0.0)
}

pub fn one() -> C64 {
    C64::new(1.0, 0.0)
}

/// `l^p` norm of a vector, `p` in `[1, ∞]`.
pub fn vector_norm(v: &CVec, p: f64) -> f64 {
    if p.is_infinite() {
        v.iter().map(|z| z.norm()).fold(0.0, f64::max)
    } else if p == 1.0 {
        v.iter().map(|z| z.norm()).sum()
    } else if p == 2.0 {
        v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    } else {
        v.iter().map(|z| z.norm().powf(p)).sum::<f64>().powf(1.0 / p)
    }
}

/// Dual exponent `p' = p / (p - 1)`.
pub fn dual_exponent(p: f64) -> f64 {
    if p == 1.0 {
        f64::INFINITY
    } else if p.is_infinite() {
        1.0
    } else {
        p / (p - 1.0)
    }
}

pub fn max_column_sum(m: &CMat) -> f64 {
    (0..m.ncols())
        .map(|j| m.column(j).iter().map(|z| z.norm()).sum::<f64>())
        .fold(0.0, f64::max)
}

pub fn max_row_sum(m: &CMat) -> f64 {
    (0..m.nrows())
        .map(|i| m.row(i).iter().map(|z| z.norm()).sum::<f64>())
        .fold(0.0, f64::max)
}

pub fn spectral_norm(m: &CMat) -> f64 {
    if m.is_empty() {
        return 0.0;
    }
    m.singular_values().max()
}

pub fn frobenius(m: &CMat) -> f64 {
    m.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// Exact induced norm for `p` in `{1, 2, ∞}`.
pub fn exact_operator_norm(m: &CMat, p: f64) -> Option<f64> {
    if p == 1.0 {
        Some(max_column_sum(m))
    } else if p == 2.0 {
        Some(spectral_norm(m))
    } else if p.is_infinite() {
        Some(max_row_sum(m))
    } else {
        None
    }
}

/// 2-norm condition number from singular values.
pub fn condition_number(m: &CMat) -> f64 {
    let sv = m.singular_values();
    let max = sv.max();
    let min = sv.min();
    if min == 0.0 {
        f64::INFINITY
    } else {
        max / min
    }
}

/// Inverse by LU; `None` when singular.
pub fn inverse(m: &CMat) -> Option<CMat> {
    m.clone().lu().try_inverse()
}

/// Least-squares solution of `a x = b` and its residual norm.
pub fn least_squares(a: &CMat, b: &CVec) -> (CVec, f64) {
    let svd = a.clone().svd(true, true);
    let scale = svd.singular_values.max().max(1.0);
    let x = svd
        .solve(b, 1e-12 * scale)
        .expect("SVD was computed with both factors");
    let residual = (a * &x - b).norm();
    (x, residual)
}

/// `m^k` by repeated squaring.
pub fn matrix_power(m: &CMat, mut k: usize) -> CMat {
    let mut result = identity(m.nrows());
    let mut base = m.clone();
    while k > 0 {
        if k & 1 == 1 {
            result = &result * &base;
        }
        k >>= 1;
        if k > 0 {
            base = &base * &base;
        }
    }
    result
}

/// Principal power `w^alpha` with `0^alpha := 0`.
pub fn principal_pow(w: C64, alpha: f64) -> C64 {
    if w.norm() == 0.0 {
        return zero();
    }
    (w.ln() * alpha).exp()
}

pub fn from_real_rows(rows: &[&[f64]]) -> CMat {
    let n = rows.len();
    let m = rows.first().map_or(0, |r| r.len());
    CMat::from_fn(n, m, |i, j| C64::new(rows[i][j], 0.0))
}

pub fn diag(values: &[C64]) -> CMat {
    CMat::from_diagonal(&CVec::from_column_slice(values))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn norms_of_simple_matrices() {
        let m = diag(&[C64::new(3.0, 0.0), C64::new(-4.0, 0.0)]);
        assert_abs_diff_eq!(spectral_norm(&m), 4.0, epsilon = 1e-12);
        let n = from_real_rows(&[&[0.0, 1.0], &[0.0, 0.0]]);
        assert_abs_diff_eq!(max_column_sum(&n), 1.0);
        assert_abs_diff_eq!(max_row_sum(&n), 1.0);
        assert_eq!(dual_exponent(1.0), f64::INFINITY);
        assert_eq!(dual_exponent(f64::INFINITY), 1.0);
        assert_abs_diff_eq!(dual_exponent(3.0), 1.5);
    }

    #[test]
    fn matrix_power_matches_repeated_products() {
        let m = from_real_rows(&[&[0.5, 1.0], &[0.0, 0.25]]);
        let mut p = identity(2);
        for k in 0..9 {
            assert!((matrix_power(&m, k) - &p).norm() < 1e-14);
            p = &p * &m;
        }
    }

    #[test]
    fn principal_pow_conventions() {
        assert_eq!(principal_pow(zero(), 0.5), zero());
        assert_abs_diff_eq!(principal_pow(C64::new(0.5, 0.0), 0.5).re, 0.5f64.sqrt(), epsilon = 1e-15);
        let z = principal_pow(C64::new(0.0, 1.0), 0.5);
        assert_abs_diff_eq!(z.arg(), std::f64::consts::FRAC_PI_4, epsilon = 1e-15);
    }
}
