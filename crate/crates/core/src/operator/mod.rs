//! Finite-dimensional operators on `C^n` equipped with an `l^p` norm.

mod ergodic;
mod ritt;
mod spectral;

pub use ergodic::{
    cesaro_means, cesaro_projection, lambda_limit, lambda_operator, lambda_operators, range_residual,
    spectral_projection, vertex_factor,
};
pub use ritt::{
    classify_ritt, power_family_bound, ritt_constant, spectral_type, PowerFamilyBound, RittClassification,
    RittConstant, RittMesh, VERTEX_TOL,
};
pub use spectral::{
    fractional_factor, fractional_factor_with, Diagonalizer, SchurForm, SpectralData,
    DIAGONALIZATION_CONDITION_CAP,
};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{self, CMat, CVec};
use crate::random::random_complex_vector;
use crate::C64;

/// Starting vectors used by the `l^p` norm estimator for `p ∉ {1, 2, ∞}`.
pub const NORM_ESTIMATE_STARTS: usize = 32;

/// An `n × n` complex matrix acting on `(C^n, ‖·‖_p)`.
#[derive(Debug, Clone, PartialEq)]
pub struct FiniteOperator {
    entries: CMat,
    ambient_p: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum NormMethod {
    Exact,
    /// Best value over power-method runs: a lower bound for the true norm.
    PowerIterationLowerBound,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NormEstimate {
    pub value: f64,
    pub method: NormMethod,
}

impl FiniteOperator {
    pub fn new(entries: CMat, ambient_p: f64) -> Result<Self> {
        if entries.nrows() == 0 || entries.nrows() != entries.ncols() {
            return Err(Error::DimensionMismatch {
                expected: entries.nrows().max(1),
                actual: entries.ncols(),
            });
        }
        if entries.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::Precondition("operator entries must be finite".into()));
        }
        if !(ambient_p >= 1.0) {
            return Err(Error::Domain {
                name: "p",
                value: ambient_p,
                expected: "1 <= p <= ∞",
            });
        }
        Ok(Self { entries, ambient_p })
    }

    /// Hilbert-space operator (`p = 2`).
    pub fn hilbert(entries: CMat) -> Result<Self> {
        Self::new(entries, 2.0)
    }

    pub fn diagonal(values: &[C64], ambient_p: f64) -> Result<Self> {
        Self::new(linalg::diag(values), ambient_p)
    }

    pub fn zero(n: usize, ambient_p: f64) -> Self {
        Self::new(CMat::zeros(n, n), ambient_p).expect("valid")
    }

    pub fn entries(&self) -> &CMat {
        &self.entries
    }

    pub fn ambient_p(&self) -> f64 {
        self.ambient_p
    }

    pub fn dim(&self) -> usize {
        self.entries.nrows()
    }

    /// Same ambient space, new matrix.
    pub fn with_entries(&self, entries: CMat) -> Result<Self> {
        Self::new(entries, self.ambient_p)
    }

    pub fn scaled(&self, rho: f64) -> Self {
        Self {
            entries: &self.entries * C64::new(rho, 0.0),
            ambient_p: self.ambient_p,
        }
    }

    /// Conjugate transpose acting on the dual exponent `p'`.
    pub fn adjoint(&self) -> Self {
        Self {
            entries: self.entries.adjoint(),
            ambient_p: linalg::dual_exponent(self.ambient_p),
        }
    }

    pub fn vector_norm(&self, x: &CVec) -> f64 {
        linalg::vector_norm(x, self.ambient_p)
    }

    pub fn operator_norm(&self) -> f64 {
        self.norm_estimate().value
    }

    pub fn norm_estimate(&self) -> NormEstimate {
        matrix_norm(&self.entries, self.ambient_p)
    }

    /// Norm of another matrix on the same ambient space.
    pub fn norm_of(&self, m: &CMat) -> f64 {
        matrix_norm(m, self.ambient_p).value
    }

    pub fn spectrum(&self) -> SpectralData {
        SpectralData::new(&self.entries)
    }

    pub fn eigenvalues(&self) -> Vec<C64> {
        self.spectrum().eigenvalues().to_vec()
    }

    /// `(zI - T)^{-1}`.
    pub fn resolvent(&self, z: C64) -> Result<CMat> {
        ResolventEvaluator::new(self).at(z)
    }
}

/// Induced `p`-norm of `m`; exact for `p ∈ {1, 2, ∞}`.
pub fn matrix_norm(m: &CMat, p: f64) -> NormEstimate {
    match linalg::exact_operator_norm(m, p) {
        Some(value) => NormEstimate {
            value,
            method: NormMethod::Exact,
        },
        None => NormEstimate {
            value: lp_norm_lower_bound(m, p, NORM_ESTIMATE_STARTS, 0x5eed),
            method: NormMethod::PowerIterationLowerBound,
        },
    }
}

/// Power method for `‖m‖_{p→p}` alternating between `m` and `m^*` through
/// the duality maps of `l^p` and `l^{p'}`; every iterate is a feasible
/// point, so the best ratio seen is a lower bound.
pub fn lp_norm_lower_bound(m: &CMat, p: f64, starts: usize, seed: u64) -> f64 {
    let n = m.ncols();
    let q = linalg::dual_exponent(p);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let adjoint = m.adjoint();
    let mut best = 0.0f64;
    for start in 0..starts.max(1) {
        let mut x = if start < n {
            let mut e = CVec::zeros(n);
            e[start] = linalg::one();
            e
        } else {
            random_complex_vector(&mut rng, n)
        };
        let nx = linalg::vector_norm(&x, p);
        if nx == 0.0 {
            continue;
        }
        x /= C64::new(nx, 0.0);
        let mut previous = -1.0;
        for _ in 0..200 {
            let y = m * &x;
            let value = linalg::vector_norm(&y, p);
            best = best.max(value);
            if value == 0.0 || (value - previous).abs() <= 1e-14 * value {
                break;
            }
            previous = value;
            let z = &adjoint * duality_map(&y, p);
            if z.norm() == 0.0 {
                break;
            }
            x = duality_map(&z, q);
        }
    }
    best
}

/// Unit vector of `l^{p'}` norming `y`: `<y, v> = ‖y‖_p`.
fn duality_map(y: &CVec, p: f64) -> CVec {
    let norm = linalg::vector_norm(y, p);
    if norm == 0.0 {
        return y.clone();
    }
    y.map(|z| {
        let a = z.norm();
        if a == 0.0 {
            linalg::zero()
        } else {
            let phase = z / a;
            phase * (a / norm).powf(p - 1.0)
        }
    })
}

/// Resolvent with cached eigenvalues for repeated evaluation.
#[derive(Debug, Clone)]
pub struct ResolventEvaluator<'a> {
    operator: &'a FiniteOperator,
    eigenvalues: Vec<C64>,
}

impl<'a> ResolventEvaluator<'a> {
    pub fn new(operator: &'a FiniteOperator) -> Self {
        Self {
            operator,
            eigenvalues: operator.eigenvalues(),
        }
    }

    pub fn eigenvalues(&self) -> &[C64] {
        &self.eigenvalues
    }

    pub fn at(&self, z: C64) -> Result<CMat> {
        let tol = 1e-12 * (1.0 + z.norm());
        if self.eigenvalues.iter().any(|l| (l - z).norm() <= tol) {
            return Err(Error::SingularResolvent { re: z.re, im: z.im });
        }
        let n = self.operator.dim();
        let shifted = CMat::identity(n, n) * z - self.operator.entries();
        linalg::inverse(&shifted).ok_or(Error::SingularResolvent { re: z.re, im: z.im })
    }
}
