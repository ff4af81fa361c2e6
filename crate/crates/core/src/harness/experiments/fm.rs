//! The Franks–McIntosh decomposition on `E_r`.

use rayon::prelude::*;

use crate::calculus::interior_grid;
use crate::error::Result;
use crate::fm::{
    alpha_coefficients, build_basis, fit_decay, half_power_sum, kernel_bounds, reconstruction_error, sample_points,
    DecaySettings, FMContour, FmParams, Truncation,
};
use crate::geometry::UnimodularVertexSet;
use crate::harness::config::{config_error, ExperimentConfig};
use crate::harness::report::{csv_table, Check, ExperimentReport, Method};
use crate::linalg;
use crate::C64;

pub fn defaults() -> ExperimentConfig {
    let mut c = ExperimentConfig::new("exp_fm")
        .with_param("functions", vec!["one", "z", "sqrt_vertex"])
        .with_param("k_cuts", vec![5i64, 10, 15, 25])
        .with_param("p_cuts", vec![5i64, 10, 15])
        .with_param("grid", 200i64)
        .with_param("k_max", 40i64)
        .with_param("p_max", 20i64)
        .with_param("tolerance", 1e-3)
        .with_param("half_power_grid", 100i64)
        .with_param("half_power_truncation", vec![20i64, 10]);
    c.domain = crate::harness::config::DomainSpec::roots(2, 0.6, 0.8);
    c
}

/// Test functions by name.
pub fn test_function(name: &str, vertices: &UnimodularVertexSet) -> Result<Box<dyn Fn(C64) -> C64 + Sync>> {
    let e = vertices.clone();
    Ok(match name {
        "one" => Box::new(|_| linalg::one()),
        "z" => Box::new(|z| z),
        "sqrt_vertex" => Box::new(move |z| {
            e.vertices()
                .iter()
                .fold(linalg::one(), |acc, x| acc * linalg::principal_pow(1.0 - x.conj() * z, 0.5))
        }),
        "vertex_poly" => Box::new(move |z| e.vertex_product(z) * (1.0 + 2.0 * z)),
        _ => {
            return Err(config_error(
                "params.functions",
                &format!("unknown function `{name}` (one, z, sqrt_vertex, vertex_poly)"),
            ))
        }
    })
}

pub fn run(config: &ExperimentConfig) -> Result<ExperimentReport> {
    let names = match config.params.get("functions") {
        Some(toml::Value::Array(a)) => a
            .iter()
            .map(|v| v.as_str().map(str::to_string).ok_or_else(|| config_error("params.functions", "expected strings")))
            .collect::<Result<Vec<_>>>()?,
        Some(_) => return Err(config_error("params.functions", "expected an array of strings")),
        None => vec!["one".into(), "z".into(), "sqrt_vertex".into()],
    };
    let k_cuts = config.param_usize_list("k_cuts", &[5, 10, 15, 25])?;
    let p_cuts = config.param_usize_list("p_cuts", &[5, 10, 15])?;
    let grid_size = config.param_usize("grid", 200)?;
    let tol = config.param_f64("tolerance", 1e-3)?;
    let hp_grid = config.param_usize("half_power_grid", 100)?;
    let hp_trunc = config.param_usize_list("half_power_truncation", &[20, 10])?;
    if hp_trunc.len() != 2 {
        return Err(config_error("params.half_power_truncation", "expected [k_cut, p_cut]"));
    }
    let params = FmParams {
        k_max: config.param_usize("k_max", 40)?,
        p_max: config.param_usize("p_max", 20)?,
        rho: config.params.get("rho").and_then(|v| v.as_float()),
        ..FmParams::default()
    };
    let e = config.domain.vertex_set()?;
    let mut report = ExperimentReport::new(config);

    let contour = FMContour::build(&e, config.domain.r, config.domain.s, &params)?;
    let basis = build_basis(&contour, params.p_max)?;
    let cl = contour.clearance();
    report.push(Check::info("rho", contour.rho(), Method::Exact, 1));
    report.push(Check::info("segment length l", contour.l(), Method::Exact, 1));
    report.push(Check::at_least("disc clearance from ∂E_r", cl.disc_inner, 0.0, Method::Fitted, contour.subsegments().len()));
    report.push(Check::at_most("winding number error", (cl.winding_number - 1.0).abs(), 1e-6, Method::Fitted, 1));
    report.push(Check::at_most("basis Gram residual", basis.gram_residual(), 1e-8, Method::Exact, basis.entries().len()));
    report.artifact("contour", contour.to_csv());

    // reconstruction sweep
    let domain = contour.inner_domain();
    let grid = interior_grid(&domain, grid_size);
    let mut rows = Vec::new();
    let k_final = *k_cuts.iter().max().unwrap_or(&25);
    let (p_lo, p_hi) = (
        *p_cuts.iter().min().unwrap_or(&5),
        *p_cuts.iter().max().unwrap_or(&15),
    );
    for (fi, name) in names.iter().enumerate() {
        let h = test_function(name, &e)?;
        let coeffs = alpha_coefficients(&contour, &basis, &h);
        if fi == 0 {
            report.artifact(&format!("coefficients_{name}"), coeffs.to_csv());
        }
        report.push(Check::at_most(
            &format!("coefficient bound / sup h [{name}]"),
            coeffs.certificate_ratio,
            // constants attain the Cauchy-Schwarz bound, up to rounding
            coeffs.constant * (1.0 + 1e-12),
            Method::Exact,
            coeffs.records().len(),
        ));
        let mut err_at = |k: usize, p: usize| -> Result<f64> {
            let r = reconstruction_error(&contour, &basis, &coeffs, &h, &grid, Truncation::new(k, p))?;
            rows.push(vec![fi as f64, k as f64, p as f64, r.max_error]);
            Ok(r.max_error)
        };
        let mut table = Vec::new();
        for &k in &k_cuts {
            for &p in &p_cuts {
                table.push(((k, p), err_at(k, p)?));
            }
        }
        let find = |k: usize, p: usize| table.iter().find(|(kp, _)| *kp == (k, p)).map(|(_, e)| *e);
        let fine = find(k_final, p_hi).expect("in sweep");
        let coarse = find(k_final, p_lo).expect("in sweep");
        report.push(Check::at_most(
            &format!("max error at (K,P)=({k_final},{p_hi}) [{name}]"),
            fine,
            tol,
            Method::Exact,
            grid.len(),
        ));
        report.push(Check::at_most(
            &format!("error ratio P={p_hi} / P={p_lo} [{name}]"),
            fine / coarse,
            0.1,
            Method::Exact,
            grid.len(),
        ));
    }
    report.artifact("reconstruction", csv_table(&["function", "k_cut", "p_cut", "max_error"], &rows));

    // decay constants of Φ
    let settings = DecaySettings::default();
    let fit = fit_decay(&contour, &basis, &settings)?;
    let worst = fit.sectors.iter().map(|s| s.worst_ratio).fold(0.0, f64::max);
    let samples: usize = fit.sectors.iter().map(|s| s.samples).sum();
    report.push(Check::at_most("decay model: max |Φ| / (5 c_fit model)", worst, 1.0, Method::Fitted, samples));
    report.push(Check::info("decay slope in p", fit.p_slope, Method::Fitted, fit.envelope.len()));
    report.push(Check::at_most(
        "decay slope relative error vs -ln 2",
        fit.slope_relative_error,
        0.15,
        Method::Fitted,
        fit.envelope.len(),
    ));
    let decay_rows: Vec<Vec<f64>> = fit
        .sectors
        .iter()
        .map(|s| {
            vec![
                s.m as f64,
                s.j as f64,
                s.region as u8 as f64,
                s.c_fit,
                s.c_sup,
                s.worst_ratio,
                s.samples as f64,
            ]
        })
        .collect();
    report.artifact(
        "decay_sectors",
        csv_table(&["m", "j", "region", "c_fit", "c_sup", "worst_ratio", "samples"], &decay_rows),
    );
    let env_rows: Vec<Vec<f64>> = fit.envelope.iter().enumerate().map(|(p, v)| vec![p as f64, *v]).collect();
    report.artifact("decay_envelope", csv_table(&["p", "envelope"], &env_rows));

    let pts = sample_points(&contour, &DecaySettings { grid: 40, q_max: 10, ..settings });
    let kb = kernel_bounds(&contour, &pts, settings.k_max)?;
    report.push(Check::holds(
        "kernel constants finite",
        kb.uniform.is_finite() && kb.band.is_finite() && kb.away.is_finite() && kb.polyline.is_finite(),
        Method::Fitted,
        pts.len(),
    ));
    report.push(Check::info("uniform kernel constant", kb.uniform, Method::Fitted, pts.len()));
    report.push(Check::info("band kernel constant", kb.band, Method::Fitted, pts.len()));
    report.push(Check::info("away kernel constant", kb.away, Method::Fitted, pts.len()));

    // Σ |Φ|^{1/2} with its tail, at two truncations
    let hp_points = interior_grid(&domain, hp_grid);
    let t1 = Truncation::new(hp_trunc[0], hp_trunc[1]);
    let t2 = Truncation::new(2 * hp_trunc[0], 2 * hp_trunc[1]);
    let sums = hp_points
        .par_iter()
        .map(|&xi| Ok((half_power_sum(&contour, &basis, &fit, xi, t1)?, half_power_sum(&contour, &basis, &fit, xi, t2)?)))
        .collect::<Result<Vec<_>>>()?;
    let m1 = sums.iter().map(|s| s.0.total).fold(0.0, f64::max);
    let m2 = sums.iter().map(|s| s.1.total).fold(0.0, f64::max);
    report.push(Check::holds("half-power sum finite", m1.is_finite() && m2.is_finite(), Method::Fitted, hp_points.len()));
    report.push(Check::info("half-power sum max", m2, Method::Fitted, hp_points.len()));
    report.push(Check::at_most("half-power doubling change", (m2 / m1 - 1.0).abs(), 0.05, Method::Fitted, hp_points.len()));
    let hp_rows: Vec<Vec<f64>> = hp_points
        .iter()
        .zip(&sums)
        .map(|(z, (a, b))| vec![z.re, z.im, a.truncated, a.tail, a.total, b.total])
        .collect();
    report.artifact("half_power", csv_table(&["re", "im", "truncated", "tail", "total", "total_doubled"], &hp_rows));
    Ok(report)
}
