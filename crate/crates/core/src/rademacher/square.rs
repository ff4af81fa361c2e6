use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::UnimodularVertexSet;
use crate::linalg::{self, CVec};
use crate::operator::{
    fractional_factor_with, power_family_bound, range_residual, FiniteOperator, SpectralData,
};
use crate::rademacher::{rad_norm, RadEstimate, RadMethod, RadRequest, RadSettings, VectorFamily};

/// Growth of the partial value over the second half of the terms that still
/// counts as a plateau when no tail certificate is available.
const PLATEAU_TOL: f64 = 1e-3;
/// `n` in the `C_{α+1}` estimate backing the power-family certificate.
const POWER_FAMILY_HORIZON: usize = 1_000;

/// Parameters of `‖x‖_{T,α}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SquareFunctionSpec {
    pub alpha: f64,
    /// Stop once the certified tail is below `truncation_tol · ‖x‖`.
    pub truncation_tol: f64,
    pub k_cap: usize,
    pub rad: RadSettings,
}

impl Default for SquareFunctionSpec {
    fn default() -> Self {
        Self {
            alpha: 1.0,
            truncation_tol: 1e-10,
            k_cap: 200_000,
            rad: RadSettings::default(),
        }
    }
}

impl SquareFunctionSpec {
    pub fn with_alpha(alpha: f64) -> Self {
        Self {
            alpha,
            ..Self::default()
        }
    }

    fn validate(&self) -> Result<()> {
        if !(self.alpha > 0.0) {
            return Err(Error::Domain {
                name: "alpha",
                value: self.alpha,
                expected: "alpha > 0",
            });
        }
        if !(self.truncation_tol > 0.0) {
            return Err(Error::Domain {
                name: "truncation_tol",
                value: self.truncation_tol,
                expected: "truncation_tol > 0",
            });
        }
        Ok(())
    }
}

/// How the neglected terms `k > K` were bounded.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TailCertificate {
    /// Eigen-expansion `Σ_i |c_i| ‖v_i‖ |λ_i|^{k-1}` of `T^{k-1} F x`.
    Spectral,
    /// `‖y_k‖ ≤ C_{α+1} k^{-3/2} ‖z‖` for `x = Π(I - conj(ξ_j) T) z`.
    PowerFamily,
    /// Nothing certified; see `divergence_suspected`.
    None,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SquareFunction {
    pub value: RadEstimate,
    pub terms: usize,
    /// Upper bound for the Rademacher norm of the neglected terms.
    pub tail_bound: f64,
    pub certificate: TailCertificate,
    pub divergence_suspected: bool,
    /// `‖(Σ_k |y_k|²)^{1/2}‖_p`, the lattice form.
    pub lattice: f64,
}

/// Tail bound from the eigen-expansion of `F x`.
struct SpectralTail {
    // (|c_i| ‖v_i‖_p, |λ_i|)
    modes: Vec<(f64, f64)>,
    exponent: f64,
}

impl SpectralTail {
    fn new(spectral: &SpectralData, fx: &CVec, p: f64) -> Option<Self> {
        let d = spectral.diagonalizer()?;
        let coords = &d.inverse * fx;
        let scale = fx.norm().max(f64::MIN_POSITIVE);
        let mut modes = Vec::new();
        for (i, &l) in spectral.schur_eigenvalues().iter().enumerate() {
            let weight = coords[i].norm() * linalg::vector_norm(&d.vectors.column(i).into_owned(), p);
            if weight <= 1e-15 * scale {
                continue;
            }
            if l.norm() >= 1.0 - 1e-12 {
                return None;
            }
            modes.push((weight, l.norm()));
        }
        Some(Self { modes, exponent: 0.0 })
    }

    /// `Σ_{k > K} k^{α - 1/2} Σ_i w_i ρ_i^{k-1}`, or infinity when the
    /// terms are still increasing past `K`.
    fn tail(&self, k: usize) -> f64 {
        let e = self.exponent;
        let next = (k + 1) as f64;
        let growth = ((next + 1.0) / next).powf(e.max(0.0));
        self.modes
            .iter()
            .map(|&(w, rho)| {
                if rho == 0.0 {
                    return 0.0;
                }
                let q = growth * rho;
                if q >= 1.0 {
                    return f64::INFINITY;
                }
                w * next.powf(e) * rho.powf(k as f64) / (1.0 - q)
            })
            .sum()
    }
}

/// `‖x‖_{T,α}`: Rademacher norm of `k^{α-1/2} T^{k-1} Π(I - conj(ξ_j) T)^α x`.
pub fn square_function(
    op: &FiniteOperator,
    vertices: &UnimodularVertexSet,
    spec: &SquareFunctionSpec,
    x: &CVec,
) -> Result<SquareFunction> {
    spec.validate()?;
    if x.len() != op.dim() {
        return Err(Error::DimensionMismatch {
            expected: op.dim(),
            actual: x.len(),
        });
    }
    let p = op.ambient_p();
    let spectral = op.spectrum();
    let factor = fractional_factor_with(&spectral, vertices, spec.alpha)?;
    let fx = &factor * x;
    let target = spec.truncation_tol * op.vector_norm(x).max(f64::MIN_POSITIVE);

    let spectral_tail = SpectralTail::new(&spectral, &fx, p).map(|mut t| {
        t.exponent = spec.alpha - 0.5;
        t
    });
    let mut power_tail: Option<f64> = None; // C_{α+1} ‖z‖

    let mut terms: Vec<CVec> = Vec::new();
    let mut current = fx.clone();
    let mut certificate = TailCertificate::None;
    let mut tail_bound = f64::INFINITY;
    let mut sq_norms: Vec<f64> = Vec::new();
    for k in 1..=spec.k_cap.max(1) {
        if k > 1 {
            current = op.entries() * current;
        }
        let y = &current * linalg::one().scale((k as f64).powf(spec.alpha - 0.5));
        sq_norms.push(op.vector_norm(&y).powi(2));
        terms.push(y);
        if let Some(t) = &spectral_tail {
            let b = t.tail(k);
            if b < target {
                certificate = TailCertificate::Spectral;
                tail_bound = b;
                break;
            }
        }
        if spectral_tail.is_none() && (k == 64 || k.is_power_of_two() && k > 64) {
            if power_tail.is_none() {
                power_tail = Some(power_family_constant(op, vertices, spec.alpha, x)?);
            }
            let c = power_tail.expect("set above");
            let b = 2.0 * c / (k as f64).sqrt();
            if b < target {
                certificate = TailCertificate::PowerFamily;
                tail_bound = b;
                break;
            }
        }
        if current.iter().all(|z| *z == linalg::zero()) {
            certificate = TailCertificate::Spectral;
            tail_bound = 0.0;
            break;
        }
    }
    let k_used = terms.len();
    let divergence_suspected = certificate == TailCertificate::None && {
        let half: f64 = sq_norms[..k_used / 2].iter().sum();
        let all: f64 = sq_norms.iter().sum();
        all.sqrt() > (1.0 + PLATEAU_TOL) * half.sqrt()
    };
    if certificate == TailCertificate::None {
        if let Some(c) = power_tail {
            tail_bound = 2.0 * c / (k_used as f64).sqrt();
        }
    }

    let lattice = {
        let pointwise = CVec::from_fn(op.dim(), |i, _| {
            let s: f64 = terms.iter().map(|y| y[i].norm_sqr()).sum();
            linalg::one().scale(s.sqrt())
        });
        linalg::vector_norm(&pointwise, p)
    };
    let value = if p == 2.0 && spec.rad.request == RadRequest::Auto {
        RadEstimate::exact(sq_norms.iter().sum::<f64>().sqrt(), RadMethod::HilbertExact, 0)
    } else {
        rad_norm(&VectorFamily::new(terms, p)?, &spec.rad)
    };
    Ok(SquareFunction {
        value,
        terms: k_used,
        tail_bound,
        certificate,
        divergence_suspected,
        lattice,
    })
}

/// `C_{α+1} ‖z‖` with `x = Π(I - conj(ξ_j) T) z`; infinite when `x` is
/// not in that range.
fn power_family_constant(
    op: &FiniteOperator,
    vertices: &UnimodularVertexSet,
    alpha: f64,
    x: &CVec,
) -> Result<f64> {
    let (z, residual) = range_residual(op, vertices, x);
    if residual > 1e-10 * x.norm().max(1.0) {
        return Ok(f64::INFINITY);
    }
    let c = power_family_bound(op, vertices, alpha + 1.0, &[1.0], POWER_FAMILY_HORIZON)?;
    Ok(c.value * op.vector_norm(&z))
}

/// `‖y‖_{T^*,α}`: the square function of the adjoint on `l^{p'}` with the
/// conjugate vertex set.
pub fn adjoint_square_function(
    op: &FiniteOperator,
    vertices: &UnimodularVertexSet,
    spec: &SquareFunctionSpec,
    y: &CVec,
) -> Result<SquareFunction> {
    square_function(&op.adjoint(), &vertices.conjugate(), spec, y)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::from_real_rows;
    use crate::C64;
    use approx::assert_abs_diff_eq;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn vec(v: &[C64]) -> CVec {
        CVec::from_vec(v.to_vec())
    }

    #[test]
    fn closed_forms() {
        let e = UnimodularVertexSet::roots_of_unity(1);
        let spec = SquareFunctionSpec::with_alpha(1.0);
        let half = FiniteOperator::diagonal(&[c(0.5, 0.0)], 2.0).unwrap();
        let x = vec(&[c(1.0, 0.0)]);
        let got = square_function(&half, &e, &spec, &x).unwrap();
        assert_abs_diff_eq!(got.value.value, 2.0 / 3.0, epsilon = 1e-9);
        assert_eq!(got.certificate, TailCertificate::Spectral);
        assert!(!got.divergence_suspected);

        let zero = FiniteOperator::zero(3, 2.0);
        let x = vec(&[c(1.0, 2.0), c(0.0, -1.0), c(3.0, 0.0)]);
        for alpha in [0.3, 1.0, 2.5] {
            let got = square_function(&zero, &e, &SquareFunctionSpec::with_alpha(alpha), &x).unwrap();
            assert_eq!(got.value.value, x.norm());
        }

        let t = FiniteOperator::diagonal(&[c(1.0, 0.0), c(0.3, 0.0)], 2.0).unwrap();
        let kernel = vec(&[c(1.0, 0.0), c(0.0, 0.0)]);
        assert_eq!(square_function(&t, &e, &spec, &kernel).unwrap().value.value, 0.0);
    }

    #[test]
    fn hilbert_value_matches_series_per_eigenvalue() {
        // Σ_k k^{2α-1} |λ|^{2(k-1)} |1-λ|^{2α}, summed directly
        let e = UnimodularVertexSet::roots_of_unity(1);
        let l = c(0.95, 0.02);
        let t = FiniteOperator::diagonal(&[l], 2.0).unwrap();
        for alpha in [0.5, 1.0, 2.0] {
            let got = square_function(&t, &e, &SquareFunctionSpec::with_alpha(alpha), &vec(&[c(1.0, 0.0)]))
                .unwrap();
            let oracle: f64 = (1..20_000)
                .map(|k| {
                    (k as f64).powf(2.0 * alpha - 1.0)
                        * l.norm().powi(2 * (k as i32 - 1))
                        * (1.0 - l).norm().powf(2.0 * alpha)
                })
                .sum::<f64>()
                .sqrt();
            assert_abs_diff_eq!(got.value.value, oracle, epsilon = 1e-9 * oracle);
        }
    }

    #[test]
    fn defective_operator_uses_power_family_certificate_or_flags() {
        let e = UnimodularVertexSet::roots_of_unity(1);
        let m = from_real_rows(&[&[0.5, 1.0], &[0.0, 0.5]]);
        let t = FiniteOperator::hilbert(m).unwrap();
        let spec = SquareFunctionSpec {
            truncation_tol: 1e-2,
            k_cap: 100_000,
            ..SquareFunctionSpec::with_alpha(1.0)
        };
        let got = square_function(&t, &e, &spec, &vec(&[c(1.0, 0.0), c(1.0, 0.0)])).unwrap();
        assert!(got.value.value.is_finite());
        assert!(!got.divergence_suspected);
        assert!(got.tail_bound.is_finite());
    }

    #[test]
    fn non_ritt_input_is_flagged() {
        // |λ| = 1 off the vertex set: terms never decay
        let e = UnimodularVertexSet::roots_of_unity(1);
        let t = FiniteOperator::diagonal(&[c(0.0, 1.0)], 2.0).unwrap();
        let spec = SquareFunctionSpec {
            k_cap: 2_000,
            ..SquareFunctionSpec::default()
        };
        let got = square_function(&t, &e, &spec, &vec(&[c(1.0, 0.0)])).unwrap();
        assert!(got.divergence_suspected);
        assert_eq!(got.certificate, TailCertificate::None);
    }

    #[test]
    fn adjoint_examples() {
        let e = UnimodularVertexSet::roots_of_unity(2);
        let spec = SquareFunctionSpec::default();
        let zero = FiniteOperator::zero(2, 1.0);
        let y = vec(&[c(1.0, 0.0), c(-2.0, 0.5)]);
        let got = adjoint_square_function(&zero, &e, &spec, &y).unwrap();
        assert!(got.value.method == RadMethod::MonteCarlo);
        assert_abs_diff_eq!(got.value.value, linalg::vector_norm(&y, f64::INFINITY), epsilon = 1e-12);

        let e1 = UnimodularVertexSet::roots_of_unity(1);
        let d = FiniteOperator::diagonal(&[c(0.4, 0.0), c(-0.3, 0.0)], 2.0).unwrap();
        let x = vec(&[c(1.0, 1.0), c(0.5, 0.0)]);
        let a = square_function(&d, &e1, &spec, &x).unwrap();
        let b = adjoint_square_function(&d, &e1, &spec, &x).unwrap();
        assert_abs_diff_eq!(a.value.value, b.value.value, epsilon = 1e-12);
    }

    #[test]
    fn lattice_form_equals_value_at_p2() {
        let e = UnimodularVertexSet::roots_of_unity(1);
        let t = FiniteOperator::diagonal(&[c(0.7, 0.1), c(0.2, 0.0)], 2.0).unwrap();
        let got = square_function(&t, &e, &SquareFunctionSpec::default(), &vec(&[c(1.0, 0.0), c(0.0, 1.0)]))
            .unwrap();
        assert_abs_diff_eq!(got.lattice, got.value.value, epsilon = 1e-12);
    }
}
