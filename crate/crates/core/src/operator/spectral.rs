use nalgebra::linalg::Schur;

use crate::error::{Error, Result};
use crate::geometry::UnimodularVertexSet;
use crate::linalg::{self, CMat};
use crate::operator::FiniteOperator;
use crate::C64;

/// Diagonalization is used for functions of `T` only below this 2-norm
/// condition number of the eigenvector matrix.
pub const DIAGONALIZATION_CONDITION_CAP: f64 = 1e6;
/// Eigenvector matrices above this condition number are not stored.
const MAX_STORED_CONDITION: f64 = 1e12;
/// Diagonal entries of the Schur form closer than this (relative) are merged
/// into one confluent point of a divided difference.
const CLUSTER_TOL: f64 = 1e-9;

/// Complex Schur factorization `T = Q U Q^*`.
#[derive(Debug, Clone, PartialEq)]
pub struct SchurForm {
    pub q: CMat,
    pub upper: CMat,
}

/// Eigenvector matrix of a diagonalizable operator, columns in Schur order.
#[derive(Debug, Clone, PartialEq)]
pub struct Diagonalizer {
    pub vectors: CMat,
    pub inverse: CMat,
    pub condition: f64,
}

/// Eigenvalues together with the factorizations they came from.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralData {
    /// Sorted by `(re, im)`.
    eigenvalues: Vec<C64>,
    /// Eigenvalues in the order of the Schur diagonal.
    schur_eigenvalues: Vec<C64>,
    schur: SchurForm,
    diagonalizer: Option<Diagonalizer>,
}

impl SpectralData {
    pub fn new(m: &CMat) -> Self {
        let n = m.nrows();
        let (q, mut upper) = Schur::new(m.clone()).unpack();
        for j in 0..n {
            for i in j + 1..n {
                upper[(i, j)] = linalg::zero();
            }
        }
        let schur_eigenvalues: Vec<C64> = (0..n).map(|i| upper[(i, i)]).collect();
        let mut eigenvalues = schur_eigenvalues.clone();
        eigenvalues.sort_by(|a, b| {
            a.re.partial_cmp(&b.re)
                .unwrap_or(std::cmp::Ordering::Equal)
                .then(a.im.partial_cmp(&b.im).unwrap_or(std::cmp::Ordering::Equal))
        });
        let diagonalizer = triangular_eigenvectors(&upper).and_then(|w| {
            let vectors = &q * w;
            let condition = linalg::condition_number(&vectors);
            if condition.is_finite() && condition <= MAX_STORED_CONDITION {
                linalg::inverse(&vectors).map(|inverse| Diagonalizer {
                    vectors,
                    inverse,
                    condition,
                })
            } else {
                None
            }
        });
        Self {
            eigenvalues,
            schur_eigenvalues,
            schur: SchurForm { q, upper },
            diagonalizer,
        }
    }

    pub fn eigenvalues(&self) -> &[C64] {
        &self.eigenvalues
    }

    pub fn schur(&self) -> &SchurForm {
        &self.schur
    }

    pub fn diagonalizer(&self) -> Option<&Diagonalizer> {
        self.diagonalizer.as_ref()
    }

    /// Eigenvalues matching the columns of the diagonalizer.
    pub fn schur_eigenvalues(&self) -> &[C64] {
        &self.schur_eigenvalues
    }

    pub fn spectral_radius(&self) -> f64 {
        self.eigenvalues.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// `f(T)` for `f` holomorphic near the spectrum. `taylor(x, k)` must
    /// return `f^{(k)}(x) / k!`. Uses the eigenvector matrix when its
    /// condition number is at most [`DIAGONALIZATION_CONDITION_CAP`], the
    /// Schur form otherwise.
    pub fn apply<F>(&self, taylor: F) -> Result<CMat>
    where
        F: Fn(C64, usize) -> C64,
    {
        if let Some(d) = self
            .diagonalizer
            .as_ref()
            .filter(|d| d.condition <= DIAGONALIZATION_CONDITION_CAP)
        {
            let values: Vec<C64> = self.schur_eigenvalues.iter().map(|&l| taylor(l, 0)).collect();
            if values.iter().any(|v| !v.re.is_finite() || !v.im.is_finite()) {
                return Err(Error::Precondition(
                    "function is not finite on the spectrum".into(),
                ));
            }
            return Ok(&d.vectors * linalg::diag(&values) * &d.inverse);
        }
        let fu = triangular_function(&self.schur.upper, &taylor)?;
        Ok(&self.schur.q * fu * self.schur.q.adjoint())
    }
}

/// Eigenvectors of an upper-triangular matrix by back substitution; `None`
/// when a repeated eigenvalue is defective.
fn triangular_eigenvectors(u: &CMat) -> Option<CMat> {
    let n = u.nrows();
    let scale = linalg::frobenius(u).max(1.0);
    let mut w = CMat::zeros(n, n);
    for k in 0..n {
        let lambda = u[(k, k)];
        w[(k, k)] = linalg::one();
        for i in (0..k).rev() {
            let mut acc = linalg::zero();
            for j in i + 1..=k {
                acc += u[(i, j)] * w[(j, k)];
            }
            let d = u[(i, i)] - lambda;
            if d.norm() <= CLUSTER_TOL * scale {
                if acc.norm() <= 1e-10 * scale {
                    w[(i, k)] = linalg::zero();
                } else {
                    return None;
                }
            } else {
                w[(i, k)] = -acc / d;
            }
        }
        let norm = w.column(k).norm();
        w.column_mut(k).unscale_mut(norm);
    }
    Some(w)
}

/// `f(U)` for upper-triangular `U` by the path-sum formula
/// `f(U)_{ij} = Σ_{i=s_0<…<s_k=j} u_{s_0 s_1}⋯u_{s_{k-1} s_k} f[u_{s_0 s_0},…,u_{s_k s_k}]`
/// with confluent divided differences.
fn triangular_function<F>(u: &CMat, taylor: &F) -> Result<CMat>
where
    F: Fn(C64, usize) -> C64,
{
    let n = u.nrows();
    let scale = (0..n).map(|i| u[(i, i)].norm()).fold(1.0, f64::max);
    let mut out = CMat::zeros(n, n);
    for i in 0..n {
        for j in i..n {
            let mut total = linalg::zero();
            // intermediate indices strictly between i and j, encoded as a bit mask
            let inner = if j > i { j - i - 1 } else { 0 };
            for mask in 0..(1usize << inner) {
                let mut path = vec![i];
                for b in 0..inner {
                    if mask & (1 << b) != 0 {
                        path.push(i + 1 + b);
                    }
                }
                if j != i {
                    path.push(j);
                }
                let mut weight = linalg::one();
                for w in path.windows(2) {
                    weight *= u[(w[0], w[1])];
                }
                if weight.norm() == 0.0 {
                    continue;
                }
                let points: Vec<C64> = path.iter().map(|&s| u[(s, s)]).collect();
                total += weight * divided_difference(&points, taylor, CLUSTER_TOL * scale);
            }
            if !total.re.is_finite() || !total.im.is_finite() {
                return Err(Error::Precondition(
                    "matrix function is undefined at a defective eigenvalue".into(),
                ));
            }
            out[(i, j)] = total;
        }
    }
    Ok(out)
}

/// Divided difference `f[x_0, …, x_k]`, treating points within `tol` as equal.
fn divided_difference<F>(points: &[C64], taylor: &F, tol: f64) -> C64
where
    F: Fn(C64, usize) -> C64,
{
    let k = points.len() - 1;
    // farthest pair; if it is within tolerance every point coincides
    let mut best = (0, 0, 0.0);
    for a in 0..points.len() {
        for b in a + 1..points.len() {
            let d = (points[a] - points[b]).norm();
            if d > best.2 {
                best = (a, b, d);
            }
        }
    }
    if best.2 <= tol {
        let mean = points.iter().sum::<C64>() / points.len() as f64;
        return taylor(mean, k);
    }
    let (a, b, _) = best;
    let without = |skip: usize| -> Vec<C64> {
        points
            .iter()
            .enumerate()
            .filter(|&(i, _)| i != skip)
            .map(|(_, &z)| z)
            .collect()
    };
    (divided_difference(&without(a), taylor, tol) - divided_difference(&without(b), taylor, tol))
        / (points[b] - points[a])
}

/// Taylor coefficient `binom(alpha, k) w^{alpha - k}` of the principal power,
/// with `0^alpha := 0` for the value.
fn power_taylor(w: C64, alpha: f64, k: usize) -> C64 {
    let mut binom = 1.0;
    for i in 0..k {
        binom *= (alpha - i as f64) / (i as f64 + 1.0);
    }
    if binom == 0.0 {
        return linalg::zero();
    }
    if w.norm() == 0.0 {
        let e = alpha - k as f64;
        return if k == 0 || e > 0.0 {
            linalg::zero()
        } else if e == 0.0 {
            C64::new(binom, 0.0)
        } else {
            C64::new(f64::INFINITY, 0.0)
        };
    }
    linalg::principal_pow(w, alpha - k as f64) * binom
}

/// `Π_j (I - conj(xi_j) T)^alpha`, principal branch of each factor,
/// multiplied in vertex order.
pub fn fractional_factor(
    op: &FiniteOperator,
    vertices: &UnimodularVertexSet,
    alpha: f64,
) -> Result<CMat> {
    if !(alpha > 0.0) {
        return Err(Error::Domain {
            name: "alpha",
            value: alpha,
            expected: "alpha > 0",
        });
    }
    let spectral = op.spectrum();
    fractional_factor_with(&spectral, vertices, alpha)
}

/// As [`fractional_factor`] with a precomputed spectral decomposition.
pub fn fractional_factor_with(
    spectral: &SpectralData,
    vertices: &UnimodularVertexSet,
    alpha: f64,
) -> Result<CMat> {
    let snap = |w: C64| if w.norm() < 1e-13 { linalg::zero() } else { w };
    let xs = vertices.vertices();
    if let Some(d) = spectral
        .diagonalizer()
        .filter(|d| d.condition <= DIAGONALIZATION_CONDITION_CAP)
    {
        let values: Vec<C64> = spectral
            .schur_eigenvalues()
            .iter()
            .map(|&l| {
                xs.iter().fold(linalg::one(), |acc, x| {
                    acc * linalg::principal_pow(snap(1.0 - x.conj() * l), alpha)
                })
            })
            .collect();
        return Ok(&d.vectors * linalg::diag(&values) * &d.inverse);
    }
    let schur = spectral.schur();
    let n = schur.upper.nrows();
    let mut product = linalg::identity(n);
    for x in xs {
        let factor = linalg::identity(n) - &schur.upper * x.conj();
        let powered = triangular_function(&factor, &|w, k| power_taylor(snap(w), alpha, k))?;
        product = product * powered;
    }
    Ok(&schur.q * product * schur.q.adjoint())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{diag, from_real_rows, identity, matrix_power};
    use crate::random::{random_complex_vector, rng};
    use approx::assert_abs_diff_eq;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn spectrum_examples() {
        let s = SpectralData::new(&diag(&[c(0.3, 0.0), c(-0.2, 0.1)]));
        assert_eq!(s.eigenvalues().len(), 2);
        assert!((s.eigenvalues()[0] - c(-0.2, 0.1)).norm() < 1e-14);
        assert!((s.eigenvalues()[1] - c(0.3, 0.0)).norm() < 1e-14);

        let jordan = from_real_rows(&[&[0.5, 1.0], &[0.0, 0.5]]);
        let s = SpectralData::new(&jordan);
        assert!(s.diagonalizer().is_none());
        for l in s.eigenvalues() {
            assert!((l - c(0.5, 0.0)).norm() < 1e-7);
        }
        let u = &s.schur().upper;
        assert!(u[(1, 0)].norm() == 0.0);

        // companion matrix of (z - 0.1)(z - 0.2i) = z^2 - (0.1 + 0.2i) z + 0.02i
        let mut comp = CMat::zeros(2, 2);
        comp[(0, 0)] = c(0.1, 0.2);
        comp[(0, 1)] = c(0.0, -0.02);
        comp[(1, 0)] = c(1.0, 0.0);
        let s = SpectralData::new(&comp);
        let ev = s.eigenvalues();
        assert!((ev[0] - c(0.0, 0.2)).norm() < 1e-10);
        assert!((ev[1] - c(0.1, 0.0)).norm() < 1e-10);
    }

    #[test]
    fn schur_reproduces_random_matrix() {
        let mut r = rng(3);
        let m = CMat::from_fn(5, 5, |_, _| crate::random::complex_normal(&mut r));
        let s = SpectralData::new(&m);
        let back = &s.schur().q * &s.schur().upper * s.schur().q.adjoint();
        assert!((back - &m).norm() < 1e-10 * m.norm());
        let d = s.diagonalizer().expect("generic matrices are diagonalizable");
        let back = &d.vectors * diag(s.schur_eigenvalues()) * &d.inverse;
        assert!((back - &m).norm() < 1e-9 * m.norm());
        let _ = random_complex_vector(&mut r, 2);
    }

    #[test]
    fn fractional_factor_examples() {
        let e = UnimodularVertexSet::roots_of_unity(1);
        let zero = FiniteOperator::zero(3, 2.0);
        for alpha in [0.3, 1.0, 2.5] {
            let f = fractional_factor(&zero, &e, alpha).unwrap();
            assert!((f - identity(3)).norm() < 1e-14);
        }
        let t = FiniteOperator::diagonal(&[c(0.5, 0.0)], 2.0).unwrap();
        let f = fractional_factor(&t, &e, 0.5).unwrap();
        assert_abs_diff_eq!(f[(0, 0)].re, 0.7071067811865476, epsilon = 1e-14);
        assert!(fractional_factor(&t, &e, 0.0).is_err());
        assert!(fractional_factor(&t, &e, -1.0).is_err());
    }

    #[test]
    fn integer_powers_match_products_on_both_routes() {
        let e = UnimodularVertexSet::roots_of_unity(2);
        // diagonalizable and defective inputs
        let mats = [
            from_real_rows(&[&[0.3, 0.2, 0.0], &[0.1, -0.4, 0.3], &[0.0, 0.2, 0.1]]),
            from_real_rows(&[&[0.4, 1.0, 0.0], &[0.0, 0.4, 1.0], &[0.0, 0.0, 0.4]]),
        ];
        for m in mats {
            let t = FiniteOperator::hilbert(m.clone()).unwrap();
            let base = (identity(3) - &m) * (identity(3) + &m);
            for k in 1..=3usize {
                let f = fractional_factor(&t, &e, k as f64).unwrap();
                let exact = matrix_power(&base, k);
                assert!((f - &exact).norm() < 1e-10 * exact.norm().max(1.0));
            }
        }
    }

    #[test]
    fn semigroup_law_on_defective_input() {
        let e = UnimodularVertexSet::roots_of_unity(1);
        let m = from_real_rows(&[&[0.6, 1.0], &[0.0, 0.6]]);
        let t = FiniteOperator::hilbert(m).unwrap();
        let a = fractional_factor(&t, &e, 0.4).unwrap();
        let b = fractional_factor(&t, &e, 0.7).unwrap();
        let ab = fractional_factor(&t, &e, 1.1).unwrap();
        assert!((a * b - ab).norm() < 1e-10);
    }

    #[test]
    fn vertex_eigenvalue_maps_to_zero() {
        let e = UnimodularVertexSet::roots_of_unity(1);
        let t = FiniteOperator::diagonal(&[c(1.0, 0.0), c(0.5, 0.0)], 2.0).unwrap();
        let f = fractional_factor(&t, &e, 0.5).unwrap();
        assert!(f[(0, 0)].norm() < 1e-14);
        assert_abs_diff_eq!(f[(1, 1)].re, 0.5f64.sqrt(), epsilon = 1e-14);
    }
}
