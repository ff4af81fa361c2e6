//! Convergence of `Λ_m` to `Π_j (I - P_j)`.

use crate::error::Result;
use crate::geometry::UnimodularVertexSet;
use crate::harness::config::ExperimentConfig;
use crate::harness::experiments::{instances, loglog_slope, max_of, per_instance, random_vectors};
use crate::harness::report::{csv_table, Check, ExperimentReport, Method};
use crate::linalg;
use crate::operator::{lambda_limit, lambda_operators, range_residual, FiniteOperator};
use crate::C64;

pub fn defaults() -> ExperimentConfig {
    let mut c = ExperimentConfig::new("exp_ergodic")
        .with_param("ms", vec![100i64, 178, 316, 562, 1000, 1778, 3162, 5623, 10000])
        .with_param("vectors", 3i64)
        .with_param("slope_range", vec![-1.2, -0.8]);
    // vertex eigenvalues make the projections nontrivial; near-vertex
    // eigenvalues stay far enough out that m ≥ 100 is asymptotic
    c.operator.vertex_eigenvalues = true;
    c.operator.vertex_exponents = [0.5, 1.0];
    c.operator.condition_cap = 10.0;
    c.domain.vertices = vec![[1.0, 0.0], [-1.0, 0.0]];
    c
}

pub fn run(config: &ExperimentConfig) -> Result<ExperimentReport> {
    let ms = config.param_usize_list("ms", &[100, 316, 1000, 3162, 10000])?;
    let nvec = config.param_usize("vectors", 3)?.max(1);
    let range = config.param_f64_list("slope_range", &[-1.2, -0.8])?;
    let e = config.domain.vertex_set()?;
    let mut report = ExperimentReport::new(config);

    // T = I on E = {1}: Λ_m = 0
    let one = UnimodularVertexSet::roots_of_unity(1);
    let id = FiniteOperator::new(linalg::identity(3), 2.0)?;
    let zero_err = lambda_operators(&id, &one, &ms).iter().map(|l| l.norm()).fold(0.0, f64::max);
    report.push(Check::at_most("T = I: Λ_m vanishes", zero_err, 0.0, Method::Exact, ms.len()));

    // T = 1/2 on E = {1}: Λ_m = 1 - (1 - 2^{-m-1}) / ((m+1)/2)
    let half = FiniteOperator::diagonal(&[C64::new(0.5, 0.0)], 2.0)?;
    let closed_err = lambda_operators(&half, &one, &ms)
        .iter()
        .zip(&ms)
        .map(|(l, &m)| {
            let closed = 1.0 - (1.0 - 0.5f64.powi(m as i32 + 1)) / (0.5 * (m + 1) as f64);
            (l[(0, 0)] - C64::new(closed, 0.0)).norm()
        })
        .fold(0.0, f64::max);
    report.push(Check::at_most("T = 1/2: closed form", closed_err, 1e-12, Method::Exact, ms.len()));

    let insts = instances(config)?;
    let runs = per_instance(&insts, |i, inst| {
        let op = &inst.operator;
        let limit = lambda_limit(op, &e)?;
        let lambdas = lambda_operators(op, &e, &ms);
        let xs = random_vectors(config.operator.seed ^ (i as u64 + 3), op.dim(), nvec);
        let mut out = Vec::new();
        for x in &xs {
            let target = &limit * x;
            let errs: Vec<f64> = lambdas.iter().map(|l| (l * x - &target).norm()).collect();
            let membership = lambdas
                .iter()
                .map(|l| range_residual(op, &e, &(l * x)).1 / x.norm())
                .fold(0.0, f64::max);
            out.push((errs, membership));
        }
        Ok(out)
    })?;

    let mfs: Vec<f64> = ms.iter().map(|&m| m as f64).collect();
    let mut slopes = Vec::new();
    let mut rows = Vec::new();
    let mut membership: f64 = 0.0;
    for (i, per) in runs.iter().enumerate() {
        for (v, (errs, mem)) in per.iter().enumerate() {
            let slope = loglog_slope(&mfs, errs);
            if slope.is_finite() {
                slopes.push(slope);
            }
            membership = membership.max(*mem);
            for (m, err) in ms.iter().zip(errs) {
                rows.push(vec![i as f64, v as f64, *m as f64, *err]);
            }
        }
    }
    let lo = range.first().copied().unwrap_or(-1.2);
    let hi = range.get(1).copied().unwrap_or(-0.8);
    report.push(Check::at_least("min log-log slope", slopes.iter().copied().fold(f64::INFINITY, f64::min), lo, Method::Fitted, slopes.len()));
    report.push(Check::at_most("max log-log slope", max_of(slopes.iter().copied()), hi, Method::Fitted, slopes.len()));
    report.push(Check::info("range-membership residual of Λ_m x", membership, Method::Exact, rows.len()));
    report.artifact("ergodic_errors", csv_table(&["instance", "vector", "m", "error"], &rows));
    Ok(report)
}
