//! Rademacher averages on `l^p_n`, R-bound estimates and square functions.

mod rbound;
mod square;

pub use rbound::{kaiser_weis_ratio, r_bound_estimate, RBoundSettings};
pub use square::{
    adjoint_square_function, square_function, SquareFunction, SquareFunctionSpec, TailCertificate,
};

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{self, CVec};
use crate::random::substream;
use crate::C64;

/// Largest family enumerated over all sign patterns.
pub const ENUMERATION_LIMIT: usize = 20;
/// Monte Carlo samples per independent stream.
const CHUNK: usize = 1024;

/// Finite family `x_1..x_K` in `(C^n, ‖·‖_p)`.
#[derive(Debug, Clone, PartialEq)]
pub struct VectorFamily {
    members: Vec<CVec>,
    ambient_p: f64,
}

impl VectorFamily {
    pub fn new(members: Vec<CVec>, ambient_p: f64) -> Result<Self> {
        let n = members
            .first()
            .map(|v| v.len())
            .ok_or_else(|| Error::Precondition("vector family must be nonempty".into()))?;
        if let Some(bad) = members.iter().find(|v| v.len() != n) {
            return Err(Error::DimensionMismatch {
                expected: n,
                actual: bad.len(),
            });
        }
        if !(ambient_p >= 1.0) {
            return Err(Error::Domain {
                name: "p",
                value: ambient_p,
                expected: "1 <= p <= ∞",
            });
        }
        Ok(Self { members, ambient_p })
    }

    pub fn members(&self) -> &[CVec] {
        &self.members
    }

    pub fn ambient_p(&self) -> f64 {
        self.ambient_p
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.members[0].len()
    }

    pub fn scaled(&self, c: C64) -> Self {
        Self {
            members: self.members.iter().map(|v| v * c).collect(),
            ambient_p: self.ambient_p,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RadMethod {
    HilbertExact,
    Enumeration,
    MonteCarlo,
}

/// Which estimator [`rad_norm`] should use.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RadRequest {
    /// Closed form at `p = 2`, Monte Carlo otherwise.
    Auto,
    /// All sign patterns when `K ≤ 20`, Monte Carlo otherwise.
    Enumeration,
    MonteCarlo,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RadSettings {
    pub request: RadRequest,
    pub samples: usize,
    pub seed: u64,
}

impl Default for RadSettings {
    fn default() -> Self {
        Self {
            request: RadRequest::Auto,
            samples: 1 << 14,
            seed: 0,
        }
    }
}

/// `(E ‖Σ ε_k x_k‖²)^{1/2}` with its provenance.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RadEstimate {
    pub value: f64,
    pub std_error: f64,
    pub method: RadMethod,
    pub samples: usize,
}

impl RadEstimate {
    pub fn exact(value: f64, method: RadMethod, samples: usize) -> Self {
        Self {
            value,
            std_error: 0.0,
            method,
            samples,
        }
    }
}

/// Rademacher norm of a family.
pub fn rad_norm(family: &VectorFamily, settings: &RadSettings) -> RadEstimate {
    let p = family.ambient_p();
    match settings.request {
        RadRequest::Auto if p == 2.0 => hilbert_rad(family),
        RadRequest::Enumeration if family.len() <= ENUMERATION_LIMIT => enumerate_rad(family),
        _ => monte_carlo_rad(family, settings.samples, settings.seed),
    }
}

/// `(Σ ‖x_k‖_2²)^{1/2}`, valid at `p = 2`.
pub fn hilbert_rad(family: &VectorFamily) -> RadEstimate {
    let sum: f64 = family.members().iter().map(|v| v.norm_squared()).sum();
    RadEstimate::exact(sum.sqrt(), RadMethod::HilbertExact, 0)
}

/// Exact average over all `2^K` patterns; `ε_1 = +1` is fixed because
/// flipping every sign preserves the norm. Patterns are visited in Gray
/// code order so each step changes one term.
pub fn enumerate_rad(family: &VectorFamily) -> RadEstimate {
    let k = family.len();
    let p = family.ambient_p();
    let xs = family.members();
    let mut signs = vec![1.0f64; k];
    let mut v = xs.iter().fold(CVec::zeros(family.dim()), |acc, x| acc + x);
    let patterns = 1usize << (k - 1);
    let mut total = linalg::vector_norm(&v, p).powi(2);
    for step in 1..patterns {
        // bit that flips between Gray codes step-1 and step, applied to ε_2..ε_K
        let bit = step.trailing_zeros() as usize + 1;
        let c = C64::new(-2.0 * signs[bit], 0.0);
        v += &xs[bit] * c;
        signs[bit] = -signs[bit];
        total += linalg::vector_norm(&v, p).powi(2);
    }
    RadEstimate::exact((total / patterns as f64).sqrt(), RadMethod::Enumeration, patterns)
}

/// Running mean and sum of squared deviations.
#[derive(Debug, Clone, Copy, Default)]
pub(crate) struct Welford {
    count: f64,
    mean: f64,
    m2: f64,
}

impl Welford {
    pub(crate) fn push(&mut self, x: f64) {
        self.count += 1.0;
        let d = x - self.mean;
        self.mean += d / self.count;
        self.m2 += d * (x - self.mean);
    }

    pub(crate) fn merge(self, other: Self) -> Self {
        if self.count == 0.0 {
            return other;
        }
        if other.count == 0.0 {
            return self;
        }
        let count = self.count + other.count;
        let d = other.mean - self.mean;
        Self {
            count,
            mean: self.mean + d * other.count / count,
            m2: self.m2 + other.m2 + d * d * self.count * other.count / count,
        }
    }

    /// `sqrt(mean)` and its delta-method standard error.
    pub(crate) fn root_estimate(&self) -> (f64, f64) {
        let value = self.mean.max(0.0).sqrt();
        if self.count < 2.0 || value == 0.0 {
            return (value, 0.0);
        }
        let var = self.m2 / (self.count - 1.0);
        let se_mean = (var / self.count).sqrt();
        (value, se_mean / (2.0 * value))
    }
}

/// Monte Carlo over `samples` sign patterns drawn from per-chunk streams of
/// `seed`; the result does not depend on the number of threads.
pub fn monte_carlo_rad(family: &VectorFamily, samples: usize, seed: u64) -> RadEstimate {
    let stats = sample_signs(family.len(), samples.max(2), seed, |signs| {
        let v = family
            .members()
            .iter()
            .zip(signs)
            .fold(CVec::zeros(family.dim()), |acc, (x, &e)| acc + x * C64::new(e, 0.0));
        linalg::vector_norm(&v, family.ambient_p()).powi(2)
    });
    let (value, std_error) = stats.root_estimate();
    RadEstimate {
        value,
        std_error,
        method: RadMethod::MonteCarlo,
        samples: samples.max(2),
    }
}

/// Welford statistics of `f(ε)` over `samples` random sign vectors of
/// length `k`.
pub(crate) fn sample_signs<F>(k: usize, samples: usize, seed: u64, f: F) -> Welford
where
    F: Fn(&[f64]) -> f64 + Sync,
{
    let chunks = samples.div_ceil(CHUNK);
    let parts: Vec<Welford> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut rng = substream(seed, c as u64);
            let mut w = Welford::default();
            let mut signs = vec![0.0; k];
            let count = CHUNK.min(samples - c * CHUNK);
            for _ in 0..count {
                for s in signs.iter_mut() {
                    *s = if rng.gen::<bool>() { 1.0 } else { -1.0 };
                }
                w.push(f(&signs));
            }
            w
        })
        .collect();
    parts.into_iter().fold(Welford::default(), Welford::merge)
}

/// Exact mean of `f(ε)` over all `2^k` sign vectors.
pub(crate) fn enumerate_signs<F>(k: usize, f: F) -> f64
where
    F: Fn(&[f64]) -> f64 + Sync,
{
    let patterns = 1usize << k;
    let total: f64 = (0..patterns)
        .into_par_iter()
        .map(|bits| {
            let signs: Vec<f64> = (0..k)
                .map(|i| if bits >> i & 1 == 1 { -1.0 } else { 1.0 })
                .collect();
            f(&signs)
        })
        .collect::<Vec<_>>()
        .into_iter()
        .sum();
    total / patterns as f64
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::random::{random_complex_vector, rng};
    use approx::assert_abs_diff_eq;

    fn e(n: usize, i: usize) -> CVec {
        let mut v = CVec::zeros(n);
        v[i] = linalg::one();
        v
    }

    #[test]
    fn rad_examples() {
        let s = RadSettings::default();
        let x = CVec::from_vec(vec![C64::new(3.0, 0.0), C64::new(0.0, 4.0)]);
        let single = VectorFamily::new(vec![x], 2.0).unwrap();
        assert_abs_diff_eq!(rad_norm(&single, &s).value, 5.0, epsilon = 1e-14);
        let pair = VectorFamily::new(vec![e(2, 0), e(2, 1)], 2.0).unwrap();
        let r = rad_norm(&pair, &s);
        assert_abs_diff_eq!(r.value, 2f64.sqrt(), epsilon = 1e-14);
        assert_eq!(r.method, RadMethod::HilbertExact);
        let sup = VectorFamily::new(vec![e(2, 0), e(2, 1)], f64::INFINITY).unwrap();
        let r = rad_norm(
            &sup,
            &RadSettings {
                request: RadRequest::Enumeration,
                ..s
            },
        );
        assert_abs_diff_eq!(r.value, 1.0, epsilon = 1e-14);
        assert_eq!(r.std_error, 0.0);
    }

    #[test]
    fn gray_code_enumeration_matches_brute_force() {
        let mut g = rng(5);
        let xs: Vec<CVec> = (0..7).map(|_| random_complex_vector(&mut g, 3)).collect();
        let fam = VectorFamily::new(xs.clone(), 1.0).unwrap();
        let brute = enumerate_signs(7, |signs| {
            let v = xs
                .iter()
                .zip(signs)
                .fold(CVec::zeros(3), |acc, (x, &s)| acc + x * C64::new(s, 0.0));
            linalg::vector_norm(&v, 1.0).powi(2)
        })
        .sqrt();
        assert_abs_diff_eq!(enumerate_rad(&fam).value, brute, epsilon = 1e-12 * brute);
        let hilbert = VectorFamily::new(xs, 2.0).unwrap();
        assert_abs_diff_eq!(enumerate_rad(&hilbert).value, hilbert_rad(&hilbert).value, epsilon = 1e-12);
    }

    #[test]
    fn monte_carlo_is_deterministic_and_close() {
        let mut g = rng(9);
        let xs: Vec<CVec> = (0..6).map(|_| random_complex_vector(&mut g, 4)).collect();
        let fam = VectorFamily::new(xs, f64::INFINITY).unwrap();
        let a = monte_carlo_rad(&fam, 1 << 14, 3);
        let b = monte_carlo_rad(&fam, 1 << 14, 3);
        assert_eq!(a, b);
        let exact = enumerate_rad(&fam).value;
        assert!((a.value - exact).abs() <= 4.0 * a.std_error);
        assert!(a.std_error > 0.0);
    }

    #[test]
    fn welford_merge_matches_single_pass() {
        let data: Vec<f64> = (0..100).map(|i| (i as f64 * 0.37).sin()).collect();
        let mut whole = Welford::default();
        data.iter().for_each(|&x| whole.push(x));
        let (mut a, mut b) = (Welford::default(), Welford::default());
        data[..37].iter().for_each(|&x| a.push(x));
        data[37..].iter().for_each(|&x| b.push(x));
        let merged = a.merge(b);
        assert_abs_diff_eq!(merged.mean, whole.mean, epsilon = 1e-14);
        assert_abs_diff_eq!(merged.m2, whole.m2, epsilon = 1e-12);
    }

    #[test]
    fn family_validation() {
        assert!(VectorFamily::new(vec![], 2.0).is_err());
        assert!(VectorFamily::new(vec![e(2, 0), e(3, 0)], 2.0).is_err());
        assert!(VectorFamily::new(vec![e(2, 0)], 0.0).is_err());
    }
}
