use serde::{Deserialize, Serialize};

use crate::calculus::Polynomial;
use crate::error::{Error, Result};
use crate::geometry::UnimodularVertexSet;
use crate::linalg::{self, CVec};
use crate::operator::{fractional_factor, range_residual, FiniteOperator};
use crate::C64;

/// Power-series coefficients of `1 / Π_j (1 - conj(ξ_j) z)^M`, optionally
/// reweighted by `k^{-(α - 1/2)}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoefficientSeries {
    pub values: Vec<C64>,
    pub multiplicity: usize,
    pub alpha_weight: Option<f64>,
    /// `max_k |Σ_i p_i d_{k-i} - δ_{k0}| / max_k |d_k|` for the unweighted
    /// coefficients `d`.
    pub recurrence_residual: f64,
}

/// Coefficients `c_0..c_{k_max}` of `1 / Π_j (1 - conj(ξ_j) z)^M`, i.e. the
/// solution of `Σ_i p_i c_{k-i} = δ_{k0}`; the residual of that recurrence
/// is recorded.
pub fn series_coefficients(vertices: &UnimodularVertexSet, m: usize, k_max: usize) -> Result<CoefficientSeries> {
    if m == 0 {
        return Err(Error::Domain {
            name: "M",
            value: 0.0,
            expected: "M >= 1",
        });
    }
    // one first-order division per factor: dividing by (1 - conj(ξ) z) maps
    // c to c'_k = c_k + conj(ξ) c'_{k-1}. Expanding the product instead splits
    // each M-fold root by O(ε^{1/M}) and the series drifts.
    let mut c = vec![linalg::zero(); k_max + 1];
    c[0] = linalg::one();
    // rounds over the whole vertex set keep the intermediate series those of
    // 1 / Π_j (1 - conj(ξ_j) z)^r, avoiding large cancelling partial products
    for _ in 0..m {
        for x in vertices.vertices() {
            let w = x.conj();
            for k in 1..=k_max {
                let prev = c[k - 1];
                c[k] += w * prev;
            }
        }
    }
    let p = Polynomial::vertex_power(vertices, m);
    let p = p.coefficients();
    let scale = c.iter().map(|v| v.norm()).fold(0.0, f64::max);
    let residual = (0..=k_max)
        .map(|k| {
            let mut acc = linalg::zero();
            for i in 0..p.len().min(k + 1) {
                acc += p[i] * c[k - i];
            }
            if k == 0 {
                acc -= 1.0;
            }
            acc.norm()
        })
        .fold(0.0, f64::max)
        / scale;
    Ok(CoefficientSeries {
        values: c,
        multiplicity: m,
        alpha_weight: None,
        recurrence_residual: residual,
    })
}

/// Weighted coefficients `c_k = d_{k-1} / k^{α - 1/2}` for `k ≥ 1`, with
/// `c_0 = 0` and `d` the coefficients of multiplicity `M`; `M` defaults to
/// `floor(α) + 1` and must exceed `α`.
pub fn weighted_coefficients(
    vertices: &UnimodularVertexSet,
    m: Option<usize>,
    alpha: f64,
    k_max: usize,
) -> Result<CoefficientSeries> {
    if !(alpha > 0.0) {
        return Err(Error::Domain {
            name: "alpha",
            value: alpha,
            expected: "alpha > 0",
        });
    }
    let m = m.unwrap_or(alpha.floor() as usize + 1);
    if !(m as f64 > alpha) {
        return Err(Error::Precondition(format!(
            "multiplicity M = {m} must exceed alpha = {alpha}"
        )));
    }
    let d = series_coefficients(vertices, m, k_max.saturating_sub(1))?;
    let mut values = vec![linalg::zero(); k_max + 1];
    for k in 1..=k_max {
        values[k] = d.values[k - 1] / (k as f64).powf(alpha - 0.5);
    }
    Ok(CoefficientSeries {
        values,
        multiplicity: m,
        alpha_weight: Some(alpha),
        recurrence_residual: d.recurrence_residual,
    })
}

impl CoefficientSeries {
    /// `max_{k in [lo, hi]} |c_k| / k^e`.
    pub fn growth(&self, exponent: f64, lo: usize, hi: usize) -> f64 {
        (lo.max(1)..=hi.min(self.values.len() - 1))
            .map(|k| self.values[k].norm() / (k as f64).powf(exponent))
            .fold(0.0, f64::max)
    }

    /// `γ - 1/2` with `γ = M - α`, the growth exponent of weighted series.
    pub fn weighted_exponent(&self) -> Option<f64> {
        self.alpha_weight.map(|a| self.multiplicity as f64 - a - 0.5)
    }
}

/// Partial sum `Σ_{k ≤ k_max} c_k T^k Π(I - conj(ξ_j) T)^3 x` with `c` the
/// multiplicity-3 coefficients, and its distance to `x`.
pub fn identity_reconstruction(
    op: &FiniteOperator,
    vertices: &UnimodularVertexSet,
    x: &CVec,
    k_max: usize,
) -> Result<(CVec, f64)> {
    let (_, membership) = range_residual(op, vertices, x);
    let scale = x.norm().max(1.0);
    if membership > 1e-8 * scale {
        return Err(Error::RangeMembership { residual: membership });
    }
    let c = series_coefficients(vertices, 3, k_max)?;
    let cube = fractional_factor(op, vertices, 3.0)?;
    let mut v = cube * x;
    let mut sum = CVec::zeros(x.len());
    for (k, ck) in c.values.iter().enumerate() {
        if k > 0 {
            v = op.entries() * v;
        }
        sum += &v * *ck;
    }
    let residual = op.vector_norm(&(&sum - x));
    Ok((sum, residual))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::calculus::partial_fractions;
    use approx::assert_abs_diff_eq;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn series_examples() {
        let e1 = UnimodularVertexSet::roots_of_unity(1);
        let s = series_coefficients(&e1, 1, 50).unwrap();
        assert!(s.values.iter().all(|v| (v - 1.0).norm() < 1e-14));
        let s = series_coefficients(&e1, 3, 200).unwrap();
        for (k, v) in s.values.iter().enumerate() {
            let closed = ((k + 1) * (k + 2)) as f64 / 2.0;
            assert!((v - closed).norm() <= 1e-12 * closed);
        }
        let e2 = UnimodularVertexSet::roots_of_unity(2);
        let s = series_coefficients(&e2, 3, 200).unwrap();
        for (k, v) in s.values.iter().enumerate() {
            if k % 2 == 1 {
                assert!(v.norm() < 1e-9);
            } else {
                let m = k / 2;
                let closed = ((m + 1) * (m + 2)) as f64 / 2.0;
                assert!((v - closed).norm() <= 1e-12 * closed);
            }
        }
        assert!(s.recurrence_residual <= 1e-10);
        assert!(series_coefficients(&e1, 0, 5).is_err());
    }

    #[test]
    fn recurrence_matches_partial_fractions() {
        for n in 1..=3 {
            let e = UnimodularVertexSet::roots_of_unity(n);
            for m in 1..=4 {
                let s = series_coefficients(&e, m, 1000).unwrap();
                let oracle = partial_fractions::coefficients(&e, m, 1000);
                let scale = oracle.iter().map(|v| v.norm()).fold(1.0, f64::max);
                for (k, (a, b)) in s.values.iter().zip(&oracle).enumerate() {
                    let err = (a - b).norm();
                    assert!(err <= 1e-9 * scale, "N={n} M={m} k={k} err={err:e} scale={scale}");
                }
            }
        }
    }

    #[test]
    fn weighted_examples() {
        let e = UnimodularVertexSet::roots_of_unity(1);
        let w = weighted_coefficients(&e, Some(2), 1.0, 100).unwrap();
        for k in 1..=100 {
            assert_abs_diff_eq!(w.values[k].re, (k as f64).sqrt(), epsilon = 1e-10 * k as f64);
        }
        assert_abs_diff_eq!(w.weighted_exponent().unwrap(), 0.5);
        assert!(weighted_coefficients(&e, Some(2), 2.0, 10).is_err());
        assert!(weighted_coefficients(&e, None, 0.0, 10).is_err());
        let e3 = UnimodularVertexSet::roots_of_unity(3);
        let w = weighted_coefficients(&e3, None, 1.5, 10_000).unwrap();
        let g = w.weighted_exponent().unwrap();
        let low = w.growth(g, 100, 1000);
        let high = w.growth(g, 100, 10_000);
        assert!(high <= 2.0 * low);
    }

    #[test]
    fn reconstruction_examples() {
        let e = UnimodularVertexSet::roots_of_unity(1);
        let zero = FiniteOperator::zero(2, 2.0);
        let x = CVec::from_vec(vec![c(1.0, 2.0), c(-0.5, 0.0)]);
        let (sum, res) = identity_reconstruction(&zero, &e, &x, 0).unwrap();
        assert_eq!(sum, x);
        assert_eq!(res, 0.0);

        let half = FiniteOperator::diagonal(&[c(0.5, 0.0)], 2.0).unwrap();
        let one = CVec::from_vec(vec![c(1.0, 0.0)]);
        let (_, res) = identity_reconstruction(&half, &e, &one, 200).unwrap();
        assert!(res < 1e-12);

        let vertex = FiniteOperator::diagonal(&[c(1.0, 0.0), c(0.5, 0.0)], 2.0).unwrap();
        let bad = CVec::from_vec(vec![c(1.0, 0.0), c(0.0, 0.0)]);
        assert!(matches!(
            identity_reconstruction(&vertex, &e, &bad, 10),
            Err(Error::RangeMembership { .. })
        ));
    }
}
