//! Mean-ergodic averages and projections.

use crate::error::{Error, Result};
use crate::geometry::UnimodularVertexSet;
use crate::linalg::{self, CMat, CVec};
use crate::operator::FiniteOperator;
use crate::C64;

/// Eigenvalues of `conj(ξ) T` within this distance of 1 span `Ran P`.
const UNIT_EIGENVALUE_TOL: f64 = 1e-9;

/// Cesàro means `(1/(m+1)) Σ_{k≤m} (conj(ξ) T)^k` for every `m` in `ms`
/// (any order), accumulated in one pass.
pub fn cesaro_means(op: &FiniteOperator, xi: C64, ms: &[usize]) -> Vec<CMat> {
    let n = op.dim();
    let step = op.entries() * xi.conj();
    let top = ms.iter().copied().max().unwrap_or(0);
    let mut out = vec![CMat::zeros(n, n); ms.len()];
    let mut power = linalg::identity(n);
    let mut sum = CMat::zeros(n, n);
    for k in 0..=top {
        sum += &power;
        for (slot, &m) in ms.iter().enumerate() {
            if m == k {
                out[slot] = &sum / C64::new((m + 1) as f64, 0.0);
            }
        }
        if k < top {
            power = &step * power;
        }
    }
    out
}

/// The Cesàro mean `C_m` for a single `m`.
pub fn cesaro_projection(op: &FiniteOperator, xi: C64, m: usize) -> CMat {
    cesaro_means(op, xi, &[m]).pop().expect("one mean requested")
}

/// Exact projection onto `ker(I - conj(ξ) T)` along the other spectral
/// subspaces; requires a diagonalizable `T`.
pub fn spectral_projection(op: &FiniteOperator, xi: C64) -> Result<CMat> {
    let spectral = op.spectrum();
    let d = spectral.diagonalizer().ok_or(Error::Conditioning {
        residual: f64::INFINITY,
    })?;
    let mask: Vec<C64> = spectral
        .schur_eigenvalues()
        .iter()
        .map(|&l| {
            if (xi.conj() * l - 1.0).norm() <= UNIT_EIGENVALUE_TOL {
                linalg::one()
            } else {
                linalg::zero()
            }
        })
        .collect();
    Ok(&d.vectors * linalg::diag(&mask) * &d.inverse)
}

/// `Λ_m = Π_j (I - C_m(ξ_j))` for every `m` in `ms`.
pub fn lambda_operators(op: &FiniteOperator, vertices: &UnimodularVertexSet, ms: &[usize]) -> Vec<CMat> {
    let n = op.dim();
    let mut out = vec![linalg::identity(n); ms.len()];
    for &x in vertices.vertices() {
        for (acc, c) in out.iter_mut().zip(cesaro_means(op, x, ms)) {
            *acc = &*acc * (linalg::identity(n) - c);
        }
    }
    out
}

pub fn lambda_operator(op: &FiniteOperator, vertices: &UnimodularVertexSet, m: usize) -> CMat {
    lambda_operators(op, vertices, &[m]).pop().expect("one operator requested")
}

/// `Π_j (I - P_j)`, the limit of `Λ_m`.
pub fn lambda_limit(op: &FiniteOperator, vertices: &UnimodularVertexSet) -> Result<CMat> {
    let n = op.dim();
    let mut acc = linalg::identity(n);
    for &x in vertices.vertices() {
        acc *= linalg::identity(n) - spectral_projection(op, x)?;
    }
    Ok(acc)
}

/// `Π_j (I - conj(ξ_j) T)`.
pub fn vertex_factor(op: &FiniteOperator, vertices: &UnimodularVertexSet) -> CMat {
    let n = op.dim();
    vertices.vertices().iter().fold(linalg::identity(n), |acc, x| {
        acc * (linalg::identity(n) - op.entries() * x.conj())
    })
}

/// Least-squares preimage `y` of `x` under `Π_j (I - conj(ξ_j) T)` and the
/// residual `‖Π(I - conj(ξ_j)T) y - x‖_2`; zero residual means `x` lies in
/// the range.
pub fn range_residual(op: &FiniteOperator, vertices: &UnimodularVertexSet, x: &CVec) -> (CVec, f64) {
    linalg::least_squares(&vertex_factor(op, vertices), x)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{diag, identity};
    use crate::random::{random_complex_vector, rng};

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn cesaro_examples() {
        let one = c(1.0, 0.0);
        let id = FiniteOperator::new(identity(3), 2.0).unwrap();
        for m in [0, 1, 7, 50] {
            assert!((cesaro_projection(&id, one, m) - identity(3)).norm() < 1e-13);
        }
        let half = FiniteOperator::diagonal(&[c(0.5, 0.0)], 2.0).unwrap();
        for m in [0usize, 3, 40] {
            let closed = (1.0 - 0.5f64.powi(m as i32 + 1)) / (0.5 * (m + 1) as f64);
            let got = cesaro_projection(&half, one, m);
            assert!((got[(0, 0)].re - closed).abs() < 1e-14);
        }
        let mixed = FiniteOperator::diagonal(&[one, c(0.3, 0.0)], 2.0).unwrap();
        let far = cesaro_projection(&mixed, one, 100_000);
        assert!((far - diag(&[one, c(0.0, 0.0)])).norm() < 1e-4);
        let exact = spectral_projection(&mixed, one).unwrap();
        assert!((exact - diag(&[one, c(0.0, 0.0)])).norm() < 1e-12);
    }

    #[test]
    fn batched_means_match_single_calls() {
        let t = FiniteOperator::diagonal(&[c(0.9, 0.1), c(-0.5, 0.0)], 2.0).unwrap();
        let xi = c(0.0, 1.0);
        let ms = [9, 2, 30];
        let batch = cesaro_means(&t, xi, &ms);
        for (m, b) in ms.iter().zip(&batch) {
            assert!((cesaro_projection(&t, xi, *m) - b).norm() < 1e-13);
        }
    }

    #[test]
    fn lambda_examples() {
        let e = UnimodularVertexSet::roots_of_unity(1);
        let id = FiniteOperator::new(identity(2), 2.0).unwrap();
        assert!(lambda_operator(&id, &e, 10).norm() < 1e-14);
        let half = FiniteOperator::diagonal(&[c(0.5, 0.0)], 2.0).unwrap();
        let m = 12;
        let closed = 1.0 - (1.0 - 0.5f64.powi(m as i32 + 1)) / (0.5 * (m + 1) as f64);
        assert!((lambda_operator(&half, &e, m)[(0, 0)].re - closed).abs() < 1e-14);
    }

    #[test]
    fn lambda_lands_in_the_range_and_commutes() {
        let e = UnimodularVertexSet::roots_of_unity(2);
        let t = FiniteOperator::diagonal(&[c(1.0, 0.0), c(0.4, 0.2), c(-1.0, 0.0), c(0.1, 0.0)], 2.0)
            .unwrap();
        let mut r = rng(11);
        let x = random_complex_vector(&mut r, 4);
        let l = lambda_operator(&t, &e, 25);
        let (_, residual) = range_residual(&t, &e, &(&l * &x));
        assert!(residual < 1e-10);
        let comm = &l * t.entries() - t.entries() * &l;
        assert!(comm.norm() < 1e-10);
        // a kernel vector is not in the range
        let mut k = CVec::zeros(4);
        k[0] = c(1.0, 0.0);
        assert!(range_residual(&t, &e, &k).1 > 0.5);
    }
}
