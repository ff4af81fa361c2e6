//! The registered experiments and the helpers they share.

pub mod adjoint;
pub mod approximation;
pub mod coefficients;
pub mod equivalence;
pub mod ergodic;
pub mod fm;
pub mod hinf;

use rayon::prelude::*;

use crate::error::Result;
use crate::geometry::UnimodularVertexSet;
use crate::harness::config::ExperimentConfig;
use crate::harness::generator::{generate_batch, GeneratedOperator, GeneratorSpec};
use crate::harness::report::ExperimentReport;
use crate::harness::textio::parse_operator;
use crate::linalg::{self, CVec};
use crate::operator::FiniteOperator;
use crate::random::{random_complex_vector, substream};
use crate::C64;

/// Theory areas an experiment exercises; every area must be covered by at
/// least one registered experiment.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Topic {
    RademacherAverages,
    RBoundedness,
    SquareFunctions,
    HilbertAndLatticeForms,
    AdjointRBoundedness,
    ResolventUniformity,
    FunctionApproximation,
    PowerFamilyBounds,
    SquareFunctionLimits,
    FranksMcIntosh,
    CalculusConstants,
    CoefficientGrowth,
    IdentityReconstruction,
    SquareFunctionEquivalence,
    WeightedCoefficients,
    ErgodicProjections,
}

impl Topic {
    pub const ALL: [Topic; 16] = [
        Topic::RademacherAverages,
        Topic::RBoundedness,
        Topic::SquareFunctions,
        Topic::HilbertAndLatticeForms,
        Topic::AdjointRBoundedness,
        Topic::ResolventUniformity,
        Topic::FunctionApproximation,
        Topic::PowerFamilyBounds,
        Topic::SquareFunctionLimits,
        Topic::FranksMcIntosh,
        Topic::CalculusConstants,
        Topic::CoefficientGrowth,
        Topic::IdentityReconstruction,
        Topic::SquareFunctionEquivalence,
        Topic::WeightedCoefficients,
        Topic::ErgodicProjections,
    ];
}

pub struct Experiment {
    pub name: &'static str,
    pub summary: &'static str,
    pub topics: &'static [Topic],
    pub defaults: fn() -> ExperimentConfig,
    pub run: fn(&ExperimentConfig) -> Result<ExperimentReport>,
}

pub static REGISTRY: [Experiment; 8] = [
    Experiment {
        name: "exp_sqfn_equivalence",
        summary: "envelope of ‖x‖_{T,α} / ‖x‖_{T,β} against the per-eigenvalue oracle",
        topics: &[
            Topic::SquareFunctionEquivalence,
            Topic::SquareFunctions,
            Topic::HilbertAndLatticeForms,
            Topic::RademacherAverages,
        ],
        defaults: equivalence::defaults,
        run: equivalence::run,
    },
    Experiment {
        name: "exp_hinf_implies_sqfn",
        summary: "square-function bounds for normal operators and the Σ|φ_k|² grid estimate",
        topics: &[Topic::SquareFunctions, Topic::HilbertAndLatticeForms],
        defaults: hinf::defaults_forward,
        run: hinf::run_forward,
    },
    Experiment {
        name: "exp_sqfn_implies_hinf",
        summary: "calculus constant against the product of square-function and R-bound constants",
        topics: &[
            Topic::CalculusConstants,
            Topic::IdentityReconstruction,
            Topic::RBoundedness,
            Topic::SquareFunctions,
        ],
        defaults: hinf::defaults_converse,
        run: hinf::run_converse,
    },
    Experiment {
        name: "exp_fm",
        summary: "Franks-McIntosh reconstruction, decay fits and half-power sums",
        topics: &[Topic::FranksMcIntosh],
        defaults: fm::defaults,
        run: fm::run,
    },
    Experiment {
        name: "exp_coefficients",
        summary: "growth of the power-series coefficients and the partial-fraction oracle",
        topics: &[Topic::CoefficientGrowth, Topic::WeightedCoefficients],
        defaults: coefficients::defaults,
        run: coefficients::run,
    },
    Experiment {
        name: "exp_approximation",
        summary: "ρ → 1 sweeps of φ(ρT), square functions, resolvent products and power families",
        topics: &[
            Topic::FunctionApproximation,
            Topic::SquareFunctionLimits,
            Topic::ResolventUniformity,
            Topic::PowerFamilyBounds,
        ],
        defaults: approximation::defaults,
        run: approximation::run,
    },
    Experiment {
        name: "exp_ergodic",
        summary: "convergence rate of the ergodic operators Λ_m toward Π(I - P_j)",
        topics: &[Topic::ErgodicProjections],
        defaults: ergodic::defaults,
        run: ergodic::run,
    },
    Experiment {
        name: "exp_adjoint_rbound",
        summary: "R-bound estimates of operator families and of their adjoints",
        topics: &[Topic::AdjointRBoundedness, Topic::RBoundedness, Topic::RademacherAverages],
        defaults: adjoint::defaults,
        run: adjoint::run,
    },
];

/// One operator of an experiment batch; generated instances keep their
/// eigen-decomposition for oracles.
pub(crate) struct Instance {
    pub operator: FiniteOperator,
    pub generated: Option<GeneratedOperator>,
}

impl Instance {
    /// True for generated operators conjugated by a unitary.
    pub fn is_normal(&self) -> bool {
        self.generated.as_ref().is_some_and(|g| {
            let s = &g.similarity;
            (s * s.adjoint() - linalg::identity(s.nrows())).norm() < 1e-10
        })
    }

    /// Candidate vectors that attain operator-norm-like suprema: the
    /// eigenvectors when known.
    pub fn eigenvectors(&self) -> Vec<CVec> {
        match &self.generated {
            Some(g) => (0..g.similarity.ncols()).map(|i| g.similarity.column(i).into_owned()).collect(),
            None => Vec::new(),
        }
    }
}

pub(crate) fn instances(config: &ExperimentConfig) -> Result<Vec<Instance>> {
    if let Some(path) = &config.operator.file {
        let op = parse_operator(&std::fs::read_to_string(path)?)?;
        return Ok(vec![Instance {
            operator: op,
            generated: None,
        }]);
    }
    let spec = GeneratorSpec::from_config(&config.domain, &config.operator)?;
    Ok(generate_batch(&spec, config.operator.instances)?
        .into_iter()
        .map(|g| Instance {
            operator: g.operator.clone(),
            generated: Some(g),
        })
        .collect())
}

/// `count` seeded complex Gaussian vectors.
pub(crate) fn random_vectors(seed: u64, n: usize, count: usize) -> Vec<CVec> {
    let mut rng = substream(seed, 0x7865);
    (0..count).map(|_| random_complex_vector(&mut rng, n)).collect()
}

/// `Σ_{k≥1} k^{2α-1} |λ|^{2(k-1)} |Π_j (1 - conj(ξ_j) λ)^α|²`, the square of
/// `‖e‖_{T,α}` for an eigenvector `e` of a normal `T` on `l²`.
pub fn scalar_square_sum(lambda: C64, vertices: &UnimodularVertexSet, alpha: f64) -> f64 {
    let f = vertices
        .vertices()
        .iter()
        .fold(1.0, |acc, x| acc * linalg::principal_pow(1.0 - x.conj() * lambda, alpha).norm());
    if f == 0.0 {
        return 0.0;
    }
    f * f * power_series(lambda.norm_sqr(), 2.0 * alpha - 1.0)
}

/// `Σ_{k≥1} k^a x^{k-1}` for `0 ≤ x < 1`, summed until the terms are
/// decreasing and negligible.
pub fn power_series(x: f64, a: f64) -> f64 {
    if x == 0.0 {
        return 1.0;
    }
    assert!(x < 1.0, "power series needs x < 1");
    let peak = if a > 0.0 { a / -x.ln() } else { 0.0 };
    let mut sum = 0.0;
    let mut xp = 1.0;
    let mut k = 1.0f64;
    loop {
        let term = k.powf(a) * xp;
        sum += term;
        if k > peak && term <= 1e-17 * sum {
            return sum;
        }
        xp *= x;
        k += 1.0;
    }
}

/// Least-squares slope of `ln y` against `ln x`, skipping zeros.
pub(crate) fn loglog_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let pts: Vec<(f64, f64)> = xs
        .iter()
        .zip(ys)
        .filter(|(_, &y)| y > 0.0)
        .map(|(&x, &y)| (x.ln(), y.ln()))
        .collect();
    let n = pts.len() as f64;
    if pts.len() < 2 {
        return f64::NAN;
    }
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    sxy / sxx
}

/// Runs `f` over the instances in parallel, keeping their order.
pub(crate) fn per_instance<T, F>(items: &[Instance], f: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(usize, &Instance) -> Result<T> + Sync,
{
    items.par_iter().enumerate().map(|(i, inst)| f(i, inst)).collect()
}

pub(crate) fn max_of(values: impl IntoIterator<Item = f64>) -> f64 {
    values.into_iter().fold(f64::NEG_INFINITY, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn power_series_closed_forms() {
        for x in [0.0, 0.3, 0.9, 0.999] {
            assert_relative_eq!(power_series(x, 0.0), 1.0 / (1.0 - x), max_relative = 1e-12);
            assert_relative_eq!(power_series(x, 1.0), 1.0 / (1.0 - x).powi(2), max_relative = 1e-11);
        }
        // ‖x‖_{T,1} for T = 1/2 on E = {1}: (1/2)² Σ k 4^{-(k-1)} = 4/9
        let e = UnimodularVertexSet::roots_of_unity(1);
        assert_relative_eq!(scalar_square_sum(C64::new(0.5, 0.0), &e, 1.0), 4.0 / 9.0, max_relative = 1e-13);
        assert_eq!(scalar_square_sum(C64::new(1.0, 0.0), &e, 1.0), 0.0);
    }

    #[test]
    fn slope_of_power_law() {
        let xs = [1.0, 10.0, 100.0];
        let ys = [3.0, 0.3, 0.03];
        assert_relative_eq!(loglog_slope(&xs, &ys), -1.0, max_relative = 1e-12);
    }
}
