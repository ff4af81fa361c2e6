//! Growth of the coefficients of `1 / Π_j (1 - conj(ξ_j) z)^M`.

use crate::calculus::{partial_fractions, series_coefficients, weighted_coefficients};
use crate::error::Result;
use crate::geometry::UnimodularVertexSet;
use crate::harness::config::ExperimentConfig;
use crate::harness::report::{csv_table, Check, ExperimentReport, Method};
use crate::C64;

pub fn defaults() -> ExperimentConfig {
    ExperimentConfig::new("exp_coefficients")
        .with_param("vertex_sets", vec![1i64, 2, 3])
        .with_param("k_max", 2000i64)
        .with_param("plateau_short", 200i64)
        .with_param("alphas", vec![0.5, 1.0, 1.5, 2.5])
        .with_param("weighted_range", vec![100i64, 1000, 10000])
}

/// `max_k |a_k - b_k| / max_{i ≤ k} |b_i|`: relative error against the
/// running scale of the oracle, which stays meaningful where `b_k = 0`.
pub fn scaled_difference(a: &[C64], b: &[C64]) -> f64 {
    let mut scale: f64 = 0.0;
    let mut worst: f64 = 0.0;
    for (x, y) in a.iter().zip(b) {
        scale = scale.max(y.norm());
        if scale > 0.0 {
            worst = worst.max((x - y).norm() / scale);
        }
    }
    worst
}

pub fn run(config: &ExperimentConfig) -> Result<ExperimentReport> {
    let sets = config.param_usize_list("vertex_sets", &[1, 2, 3])?;
    let k_max = config.param_usize("k_max", 2000)?.max(20);
    let short = config.param_usize("plateau_short", 200)?.clamp(11, k_max);
    let alphas = config.param_f64_list("alphas", &[0.5, 1.0, 1.5, 2.5])?;
    let wr = config.param_usize_list("weighted_range", &[100, 1000, 10000])?;
    let mut report = ExperimentReport::new(config);
    let mut growth_rows: Vec<Vec<f64>> = (10..=k_max).map(|k| vec![k as f64]).collect();
    let mut header = vec!["k".to_string()];

    for &n in &sets {
        let e = UnimodularVertexSet::roots_of_unity(n);
        let tag = format!("N={n}");
        let c = series_coefficients(&e, 3, k_max)?;
        let oracle = partial_fractions::coefficients(&e, 3, k_max);
        let long = c.growth(2.0, 10, k_max);
        let short_g = c.growth(2.0, 10, short);
        report.push(Check::info(&format!("max |c_k|/k² on [10,{k_max}] {tag}"), long, Method::Exact, k_max - 9));
        report.push(Check::at_most(
            &format!("plateau ratio [10,{k_max}] / [10,{short}] {tag}"),
            long / short_g,
            2.0,
            Method::Exact,
            k_max - 9,
        ));
        report.push(Check::at_most(
            &format!("partial-fraction oracle relative error {tag}"),
            scaled_difference(&c.values, &oracle),
            1e-9,
            Method::Exact,
            k_max + 1,
        ));
        report.push(Check::at_most(
            &format!("recurrence residual {tag}"),
            c.recurrence_residual,
            1e-10,
            Method::Exact,
            k_max + 1,
        ));
        header.push(format!("ratio_n{n}"));
        for (row, k) in growth_rows.iter_mut().zip(10..=k_max) {
            row.push(c.values[k].norm() / (k * k) as f64);
        }
        if n == 1 {
            let closed: Vec<C64> = (0..=k_max)
                .map(|k| C64::new(((k + 1) * (k + 2)) as f64 / 2.0, 0.0))
                .collect();
            report.push(Check::at_most(
                "binomial closed form relative error N=1",
                scaled_difference(&c.values, &closed),
                1e-12,
                Method::Exact,
                k_max + 1,
            ));
            let kk = k_max as f64;
            report.push(Check::at_most(
                "|c_k|/k² limit 1/2, N=1",
                (c.values[k_max].norm() / (kk * kk) - 0.5).abs(),
                2.0 / kk,
                Method::Exact,
                1,
            ));
        }
        if n == 2 {
            let odd = (1..=k_max).step_by(2).map(|k| c.values[k].norm()).fold(0.0, f64::max);
            report.push(Check::at_most("odd coefficients vanish, N=2", odd, 0.0, Method::Exact, k_max / 2));
        }

        if wr.len() == 3 {
            for &alpha in &alphas {
                let w = weighted_coefficients(&e, None, alpha, wr[2])?;
                let ex = w.weighted_exponent().expect("weighted");
                let a = w.growth(ex, wr[0], wr[1]);
                let b = w.growth(ex, wr[0], wr[2]);
                report.push(Check::at_most(
                    &format!("weighted plateau α={alpha} {tag}"),
                    b / a,
                    2.0,
                    Method::Exact,
                    wr[2] - wr[0] + 1,
                ));
            }
        }
    }
    let header_refs: Vec<&str> = header.iter().map(String::as_str).collect();
    report.artifact("growth", csv_table(&header_refs, &growth_rows));
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_run_passes() {
        let r = run(&defaults()).unwrap();
        assert!(r.passed(), "{}", r.to_text());
    }
}
