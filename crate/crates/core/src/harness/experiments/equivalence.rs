//! Equivalence of the square functions `‖x‖_{T,α}` and `‖x‖_{T,β}`.

use crate::error::Result;
use crate::harness::config::ExperimentConfig;
use crate::harness::experiments::{instances, max_of, per_instance, random_vectors, scalar_square_sum};
use crate::harness::report::{csv_table, Check, ExperimentReport, Method};
use crate::linalg::CVec;
use crate::operator::FiniteOperator;
use crate::rademacher::{square_function, SquareFunctionSpec};

pub fn defaults() -> ExperimentConfig {
    let mut c = ExperimentConfig::new("exp_sqfn_equivalence")
        .with_param("alphas", vec![0.5, 1.0])
        .with_param("betas", vec![1.0, 2.0])
        .with_param("x_batch", 100i64);
    c.operator.instances = 20;
    c
}

/// `max a/b · max b/a` over the pairs with both entries positive.
fn envelope(pairs: &[(f64, f64)]) -> f64 {
    let usable: Vec<&(f64, f64)> = pairs.iter().filter(|(a, b)| *a > 0.0 && *b > 0.0).collect();
    if usable.is_empty() {
        return 1.0;
    }
    max_of(usable.iter().map(|(a, b)| a / b)) * max_of(usable.iter().map(|(a, b)| b / a))
}

struct PairResult {
    alpha: f64,
    beta: f64,
    /// `(‖x‖_{T,α}, ‖x‖_{T,β})` for the doubled batch.
    values: Vec<(f64, f64)>,
    oracle: Option<Vec<(f64, f64)>>,
    divergent: usize,
}

fn norms(op: &FiniteOperator, config: &ExperimentConfig, alpha: f64, xs: &[CVec]) -> Result<(Vec<f64>, usize)> {
    let e = config.domain.vertex_set()?;
    let mut spec = SquareFunctionSpec::with_alpha(alpha);
    spec.rad.seed = config.operator.seed;
    let mut out = Vec::with_capacity(xs.len());
    let mut divergent = 0;
    for x in xs {
        let sf = square_function(op, &e, &spec, x)?;
        divergent += sf.divergence_suspected as usize;
        out.push(sf.value.value);
    }
    Ok((out, divergent))
}

pub fn run(config: &ExperimentConfig) -> Result<ExperimentReport> {
    let alphas = config.param_f64_list("alphas", &[0.5, 1.0])?;
    let betas = config.param_f64_list("betas", &[1.0, 2.0])?;
    let batch = config.param_usize("x_batch", 100)?.max(1);
    let e = config.domain.vertex_set()?;
    let mut report = ExperimentReport::new(config);
    let pairs: Vec<(f64, f64)> = alphas.iter().copied().zip(betas.iter().copied()).collect();
    if alphas.len() != betas.len() {
        return Err(crate::harness::config::config_error("params.betas", "must have as many entries as params.alphas"));
    }

    // T = 0: every square function equals ‖x‖
    let zero = FiniteOperator::zero(3, 2.0);
    let xs0 = random_vectors(config.operator.seed, 3, 8);
    let mut zero_c: f64 = 1.0;
    for &(a, b) in &pairs {
        let (na, _) = norms(&zero, config, a, &xs0)?;
        let (nb, _) = norms(&zero, config, b, &xs0)?;
        let v: Vec<(f64, f64)> = na.into_iter().zip(nb).collect();
        zero_c = zero_c.max(envelope(&v));
    }
    report.push(Check::at_most("zero operator envelope equals 1", (zero_c - 1.0).abs(), 1e-12, Method::Exact, 8));

    let insts = instances(config)?;
    let results: Vec<Vec<PairResult>> = per_instance(&insts, |i, inst| {
        let n = inst.operator.dim();
        let xs = random_vectors(config.operator.seed ^ (i as u64 + 1), n, 2 * batch);
        let oracle_ok = inst.is_normal() && inst.operator.ambient_p() == 2.0;
        pairs
            .iter()
            .map(|&(alpha, beta)| {
                let (na, da) = norms(&inst.operator, config, alpha, &xs)?;
                let (nb, db) = norms(&inst.operator, config, beta, &xs)?;
                let oracle = oracle_ok.then(|| {
                    let g = inst.generated.as_ref().expect("normal instances are generated");
                    xs.iter()
                        .map(|x| {
                            let c = &g.similarity_inverse * x;
                            let mut sa = 0.0;
                            let mut sb = 0.0;
                            for (ci, &l) in c.iter().zip(&g.eigenvalues) {
                                sa += ci.norm_sqr() * scalar_square_sum(l, &e, alpha);
                                sb += ci.norm_sqr() * scalar_square_sum(l, &e, beta);
                            }
                            (sa.sqrt(), sb.sqrt())
                        })
                        .collect()
                });
                Ok(PairResult {
                    alpha,
                    beta,
                    values: na.into_iter().zip(nb).collect(),
                    oracle,
                    divergent: da + db,
                })
            })
            .collect()
    })?;

    let mut rows = Vec::new();
    for (p, &(alpha, beta)) in pairs.iter().enumerate() {
        let tag = format!("(α,β)=({alpha},{beta})");
        let mut c_max: f64 = 0.0;
        let mut oracle_err: f64 = 0.0;
        let mut stability: f64 = 0.0;
        let mut finite = true;
        let mut oracle_count = 0;
        let mut divergent = 0;
        for (i, inst_res) in results.iter().enumerate() {
            let r = &inst_res[p];
            let c1 = envelope(&r.values[..batch]);
            let c2 = envelope(&r.values);
            finite &= c1.is_finite() && c2.is_finite();
            c_max = c_max.max(c1);
            stability = stability.max((c2 / c1 - 1.0).abs());
            divergent += r.divergent;
            if let Some(o) = &r.oracle {
                let co = envelope(&o[..batch]);
                oracle_err = oracle_err.max((c1 - co).abs() / co);
                oracle_count += 1;
            }
            for (k, (a, b)) in r.values.iter().enumerate() {
                rows.push(vec![i as f64, r.alpha, r.beta, k as f64, *a, *b]);
            }
        }
        let samples = results.len() * batch;
        report.push(Check::holds(&format!("envelope finite {tag}"), finite, Method::Exact, samples));
        report.push(Check::info(&format!("envelope C {tag}"), c_max, Method::Exact, samples));
        report.push(Check::at_most(&format!("doubling stability {tag}"), stability, 0.2, Method::Exact, 2 * samples));
        report.push(Check::at_most(&format!("divergence flags {tag}"), divergent as f64, 0.0, Method::Exact, 2 * samples));
        if oracle_count > 0 {
            report.push(Check::at_most(
                &format!("oracle relative error {tag}"),
                oracle_err,
                0.05,
                Method::Exact,
                oracle_count * batch,
            ));
        }
    }
    report.artifact("scatter", csv_table(&["instance", "alpha", "beta", "x", "norm_alpha", "norm_beta"], &rows));
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_run_passes() {
        let mut c = defaults();
        c.operator.instances = 2;
        c.operator.dimension = 3;
        c.params.insert("x_batch".into(), 10i64.into());
        let r = run(&c).unwrap();
        assert!(r.passed(), "{}", r.to_text());
    }

    #[test]
    fn diagonal_operator_matches_the_scalar_oracle() {
        let e = crate::geometry::UnimodularVertexSet::roots_of_unity(1);
        let l = crate::C64::new(0.5, 0.0);
        let t = FiniteOperator::diagonal(&[l], 2.0).unwrap();
        let x = CVec::from_vec(vec![crate::C64::new(1.0, 0.0)]);
        let c = defaults();
        let (na, _) = norms(&t, &c, 2.0, std::slice::from_ref(&x)).unwrap();
        let want = scalar_square_sum(l, &e, 2.0).sqrt();
        assert!((na[0] - want).abs() <= 1e-9 * want);
    }
}
