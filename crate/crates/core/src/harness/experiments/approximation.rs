//! Approximation of `T` by `ρT` as `ρ → 1`.

use crate::calculus::{phi_rho_convergence, CalculusSettings, ContourCalculus, HoloFunction};
use crate::error::Result;
use crate::harness::config::ExperimentConfig;
use crate::harness::experiments::{instances, max_of, per_instance, random_vectors, Instance};
use crate::harness::report::{csv_table, Check, ExperimentReport, Method};
use crate::operator::{power_family_bound, ritt_constant, spectral_type, vertex_factor, RittMesh};
use crate::rademacher::{square_function, SquareFunctionSpec};

pub fn defaults() -> ExperimentConfig {
    let mut c = ExperimentConfig::new("exp_approximation")
        .with_param("rhos", vec![0.9, 0.99, 0.999])
        .with_param("function", "cauchy_vertex")
        .with_param("function_param", 1.5)
        .with_param("alpha", 1.0)
        .with_param("plateau_alphas", vec![0.5, 1.0, 2.0])
        .with_param("plateau_rhos", vec![0.5, 0.9, 0.99, 1.0])
        .with_param("plateau_n", vec![1000i64, 10000])
        .with_param("final_tolerance", 1e-2);
    c.operator.condition_cap = 10.0;
    c
}

struct Sweep {
    phi_errors: Vec<f64>,
    phi_norm: f64,
    sqfn_errors: Vec<f64>,
    sqfn_value: f64,
    resolvent: Vec<f64>,
    plateau: Vec<(f64, f64, f64)>,
}

fn strictly_decreasing(v: &[f64]) -> bool {
    v.windows(2).all(|w| w[1] < w[0])
}

fn sweep(config: &ExperimentConfig, index: usize, inst: &Instance) -> Result<Sweep> {
    let e = config.domain.vertex_set()?;
    let s = config.domain.s;
    let rhos = config.param_f64_list("rhos", &[0.9, 0.99, 0.999])?;
    let name = config.param_str("function", "cauchy_vertex")?;
    let fparam = config.param_f64("function_param", 1.5)?;
    let alpha = config.param_f64("alpha", 1.0)?;
    let p_alphas = config.param_f64_list("plateau_alphas", &[0.5, 1.0, 2.0])?;
    let p_rhos = config.param_f64_list("plateau_rhos", &[0.5, 0.9, 0.99, 1.0])?;
    let p_n = config.param_usize_list("plateau_n", &[1000, 10000])?;
    let op = &inst.operator;

    let phi = HoloFunction::catalog(&name, fparam, &e, s)?;
    let settings = CalculusSettings {
        s,
        ..CalculusSettings::default()
    };
    let phi_errors = phi_rho_convergence(&phi, op, &e, &rhos, &settings)?;
    let u = settings.contour_radius(op, &e)?;
    let base = ContourCalculus::new(op, &e, u, settings.quadrature)?.apply(&phi)?;
    let phi_norm = op.norm_of(&base);

    // square functions of a range vector x = Π(I - conj(ξ_j) T) z
    let z = random_vectors(config.operator.seed ^ (index as u64 + 7), op.dim(), 1).remove(0);
    let x = vertex_factor(op, &e) * z;
    let spec = SquareFunctionSpec::with_alpha(alpha);
    let sqfn_value = square_function(op, &e, &spec, &x)?.value.value;
    let sqfn_errors = rhos
        .iter()
        .map(|&rho| Ok((square_function(&op.scaled(rho), &e, &spec, &x)?.value.value - sqfn_value).abs()))
        .collect::<Result<Vec<_>>>()?;

    // resolvent products of ρT outside E_{s'}, s' halfway between the type and 1
    let t = spectral_type(&op.eigenvalues(), &e).unwrap_or(1.0);
    let s_res = 0.5 * (t + 1.0);
    let mesh = RittMesh {
        angular: 32,
        radial: 12,
        min_distance: 1e-6,
    };
    let resolvent = p_rhos
        .iter()
        .map(|&rho| Ok(ritt_constant(&op.scaled(rho), &e, s_res, &mesh)?.value))
        .collect::<Result<Vec<_>>>()?;

    let plateau = p_alphas
        .iter()
        .map(|&a| {
            let coarse = power_family_bound(op, &e, a, &p_rhos, p_n[0])?.value;
            let fine = power_family_bound(op, &e, a, &p_rhos, *p_n.last().expect("nonempty"))?.value;
            Ok((a, coarse, fine))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(Sweep {
        phi_errors,
        phi_norm,
        sqfn_errors,
        sqfn_value,
        resolvent,
        plateau,
    })
}

pub fn run(config: &ExperimentConfig) -> Result<ExperimentReport> {
    let rhos = config.param_f64_list("rhos", &[0.9, 0.99, 0.999])?;
    let p_rhos = config.param_f64_list("plateau_rhos", &[0.5, 0.9, 0.99, 1.0])?;
    let tol = config.param_f64("final_tolerance", 1e-2)?;
    let mut report = ExperimentReport::new(config);
    let insts = instances(config)?;
    let sweeps = per_instance(&insts, |i, inst| sweep(config, i, inst))?;
    let n = sweeps.len();

    report.push(Check::holds(
        "‖φ(ρT) - φ(T)‖ strictly decreasing in ρ",
        sweeps.iter().all(|s| strictly_decreasing(&s.phi_errors)),
        Method::Exact,
        n,
    ));
    report.push(Check::at_most(
        "final ‖φ(ρT) - φ(T)‖ / (1 + ‖φ(T)‖)",
        max_of(sweeps.iter().map(|s| s.phi_errors.last().copied().unwrap_or(0.0) / (1.0 + s.phi_norm))),
        tol,
        Method::Exact,
        n,
    ));
    report.push(Check::holds(
        "square-function error decreasing in ρ",
        sweeps.iter().all(|s| s.sqfn_errors.windows(2).all(|w| w[1] <= w[0])),
        Method::Exact,
        n,
    ));
    report.push(Check::at_most(
        "final square-function error / (1 + ‖x‖_{T,α})",
        max_of(sweeps.iter().map(|s| s.sqfn_errors.last().copied().unwrap_or(0.0) / (1.0 + s.sqfn_value))),
        tol,
        Method::Exact,
        n,
    ));
    let one = p_rhos.iter().position(|&r| r == 1.0);
    if let Some(one) = one {
        report.push(Check::at_most(
            "resolvent-product sup over ρ / value at ρ = 1",
            max_of(sweeps.iter().map(|s| max_of(s.resolvent.iter().copied()) / s.resolvent[one])),
            2.0,
            Method::Fitted,
            n,
        ));
    }
    let alphas: Vec<f64> = sweeps.first().map(|s| s.plateau.iter().map(|p| p.0).collect()).unwrap_or_default();
    for (k, a) in alphas.iter().enumerate() {
        let growth = max_of(sweeps.iter().map(|s| {
            let (_, c, f) = s.plateau[k];
            f / c - 1.0
        }));
        report.push(Check::at_most(&format!("power-family plateau growth α={a}"), growth, 0.01, Method::Exact, n));
    }

    let mut rows = Vec::new();
    for (i, s) in sweeps.iter().enumerate() {
        for (r, (pe, se)) in rhos.iter().zip(s.phi_errors.iter().zip(&s.sqfn_errors)) {
            rows.push(vec![i as f64, *r, *pe, *se]);
        }
    }
    report.artifact("rho_sweep", csv_table(&["instance", "rho", "phi_error", "sqfn_error"], &rows));
    let mut prow = Vec::new();
    for (i, s) in sweeps.iter().enumerate() {
        for &(a, c, f) in &s.plateau {
            prow.push(vec![i as f64, a, c, f]);
        }
    }
    report.artifact("power_family", csv_table(&["instance", "alpha", "n_coarse", "n_fine"], &prow));
    Ok(report)
}
