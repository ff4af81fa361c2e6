//! Both directions between bounded calculus and square-function estimates.

use statrs::function::gamma::gamma;

use crate::calculus::{
    boundary_grid, calculus_constant, default_test_family, identity_reconstruction, rbdd_family_norms,
    CalculusSettings,
};
use crate::error::Result;
use crate::geometry::{StolzDomain, UnimodularVertexSet};
use crate::harness::config::ExperimentConfig;
use crate::harness::experiments::{
    instances, max_of, per_instance, random_vectors, scalar_square_sum, Instance,
};
use crate::harness::generator::{generate_ritt_operator, GeneratorSpec};
use crate::harness::report::{csv_table, Check, ExperimentReport, Method};
use crate::linalg::{self, CVec};
use crate::operator::{vertex_factor, FiniteOperator, VERTEX_TOL};
use crate::rademacher::{adjoint_square_function, square_function, SquareFunctionSpec};
use crate::C64;

pub fn defaults_forward() -> ExperimentConfig {
    ExperimentConfig::new("exp_hinf_implies_sqfn")
        .with_param("alpha", 1.0)
        .with_param("dimensions", vec![2i64, 4, 8, 16])
        .with_param("x_batch", 50i64)
        .with_param("grid_density", 200i64)
        .with_param("vertex_radius", 0.05)
        .with_param("min_vertex_distance", 1e-4)
}

pub fn defaults_converse() -> ExperimentConfig {
    let mut c = ExperimentConfig::new("exp_sqfn_implies_hinf")
        .with_param("x_batch", 30i64)
        .with_param("cap", 10.0)
        .with_param("normal_instances", 10i64)
        .with_param("k_max", 1000i64)
        .with_param("family_degree", 6i64)
        .with_param("family_random", 4i64);
    c.operator.instances = 20;
    c.operator.condition_cap = 10.0;
    c
}

/// `sup_x ‖x‖_{T,α} / ‖x‖` over the samples and the known eigenvectors.
fn square_function_sup(
    op: &FiniteOperator,
    vertices: &UnimodularVertexSet,
    spec: &SquareFunctionSpec,
    xs: &[CVec],
    adjoint: bool,
) -> Result<f64> {
    let mut best: f64 = 0.0;
    for x in xs {
        let nx = if adjoint { op.adjoint().vector_norm(x) } else { op.vector_norm(x) };
        if nx == 0.0 {
            continue;
        }
        let sf = if adjoint {
            adjoint_square_function(op, vertices, spec, x)?
        } else {
            square_function(op, vertices, spec, x)?
        };
        best = best.max(sf.value.value / nx);
    }
    Ok(best)
}

/// `Σ_k |φ_k(z)|²` for `φ_k(z) = k^{α-1/2} z^{k-1} Π(1 - conj(ξ_j) z)^α` and
/// its closed-form envelope `|Π(..)^α|² Γ(2α) / (x² (-ln x)^{2α})`, `x = |z|²`.
fn grid_sum(z: C64, vertices: &UnimodularVertexSet, alpha: f64) -> (f64, f64) {
    let x = z.norm_sqr();
    let sum = scalar_square_sum(z, vertices, alpha);
    let f2 = vertices
        .vertices()
        .iter()
        .fold(1.0, |acc, v| acc * linalg::principal_pow(1.0 - v.conj() * z, alpha).norm())
        .powi(2);
    let envelope = if x == 0.0 {
        f64::INFINITY
    } else {
        f2 * gamma(2.0 * alpha) / (x * x * (-x.ln()).powf(2.0 * alpha))
    };
    (sum, envelope)
}

fn boundary_points(domain: &StolzDomain, density: usize, min_distance: f64) -> Result<Vec<C64>> {
    let xs = domain.vertices().vertices().to_vec();
    Ok(boundary_grid(domain, density)?
        .into_iter()
        .filter(|z| xs.iter().all(|x| (x - z).norm() >= min_distance))
        .collect())
}

pub fn run_forward(config: &ExperimentConfig) -> Result<ExperimentReport> {
    let alpha = config.param_f64("alpha", 1.0)?;
    let dims = config.param_usize_list("dimensions", &[2, 4, 8, 16])?;
    let batch = config.param_usize("x_batch", 50)?.max(1);
    let density = config.param_usize("grid_density", 200)?.max(4);
    let v_radius = config.param_f64("vertex_radius", 0.05)?;
    let min_dist = config.param_f64("min_vertex_distance", 1e-4)?;
    let e = config.domain.vertex_set()?;
    let mut report = ExperimentReport::new(config);
    let spec = SquareFunctionSpec::with_alpha(alpha);

    let zero = FiniteOperator::zero(4, 2.0);
    let xs = random_vectors(config.operator.seed, 4, batch);
    let zero_ratio = square_function_sup(&zero, &e, &spec, &xs, false)?;
    report.push(Check::at_most("zero operator ratio equals 1", (zero_ratio - 1.0).abs(), 1e-12, Method::Exact, batch));

    // normal operators of growing dimension with the same spectral law
    let base = GeneratorSpec::from_config(&config.domain, &config.operator)?.with_cap(1.0).with_p(2.0);
    let mut rows = Vec::new();
    let mut within_oracle = true;
    let mut all_finite = true;
    for (i, &n) in dims.iter().enumerate() {
        let mut s = base.instance(i);
        s.dimension = n;
        let g = generate_ritt_operator(&s)?;
        let inst = Instance {
            operator: g.operator.clone(),
            generated: Some(g),
        };
        let mut cand = random_vectors(config.operator.seed ^ n as u64, n, batch);
        cand.extend(inst.eigenvectors());
        let ratio = square_function_sup(&inst.operator, &e, &spec, &cand, false)?;
        let g = inst.generated.as_ref().expect("generated");
        let oracle = max_of(g.eigenvalues.iter().map(|&l| scalar_square_sum(l, &e, alpha).sqrt()));
        within_oracle &= ratio <= oracle * (1.0 + 1e-9) && ratio >= oracle * (1.0 - 1e-9);
        all_finite &= ratio.is_finite();
        report.push(Check::info(&format!("sup ratio, dimension {n}"), ratio, Method::Fitted, cand.len()));
        rows.push(vec![n as f64, ratio, oracle]);
    }
    report.push(Check::holds("ratios finite", all_finite, Method::Fitted, dims.len()));
    report.push(Check::holds("sup ratio equals eigenvalue oracle", within_oracle, Method::Exact, dims.len()));
    report.artifact("dimension_scan", csv_table(&["dimension", "ratio", "oracle"], &rows));

    // grid estimate on ∂E_s
    let outer = StolzDomain::new(e.clone(), config.domain.s)?;
    let mut sups = Vec::new();
    let mut grid_rows = Vec::new();
    let mut envelope_ok = true;
    for (level, d) in [density, 2 * density].into_iter().enumerate() {
        let pts = boundary_points(&outer, d, min_dist)?;
        let mut sup: f64 = 0.0;
        for &z in &pts {
            let (sum, env) = grid_sum(z, &e, alpha);
            sup = sup.max(sum);
            if alpha >= 0.5 {
                envelope_ok &= sum <= env * (1.0 + 1e-12);
            }
            if level == 0 {
                grid_rows.push(vec![z.re, z.im, sum, env]);
            }
        }
        sups.push((sup, pts.len()));
    }
    let (g1, n1) = sups[0];
    let (g2, n2) = sups[1];
    report.push(Check::holds("grid sup finite", g1.is_finite() && g2.is_finite(), Method::Fitted, n1 + n2));
    report.push(Check::info("grid sup of Σ|φ_k|²", g2, Method::Fitted, n2));
    report.push(Check::at_most("grid sup doubling change", (g2 / g1 - 1.0).abs(), 0.05, Method::Fitted, n1 + n2));
    if alpha >= 0.5 {
        report.push(Check::holds("series below Γ(2α) envelope", envelope_ok, Method::Exact, n1 + n2));
    }
    report.artifact("grid", csv_table(&["re", "im", "sum", "envelope"], &grid_rows));

    // Stolz ratio on the vertex neighbourhoods of ∂E_s
    let pts = boundary_points(&outer, 2 * density, min_dist)?;
    for (j, &x) in e.vertices().iter().enumerate() {
        let near: Vec<f64> = pts
            .iter()
            .filter(|z| (x - *z).norm() <= v_radius)
            .map(|&z| (1.0 - x.conj() * z).norm() / (1.0 - z.norm()))
            .collect();
        let c = max_of(near.iter().copied());
        report.push(Check::holds(&format!("Stolz ratio finite at vertex {j}"), c.is_finite(), Method::Fitted, near.len()));
        report.push(Check::info(&format!("Stolz ratio at vertex {j}"), c, Method::Fitted, near.len()));
    }
    Ok(report)
}

struct ConverseRow {
    normal: bool,
    s_t: f64,
    s_star: f64,
    rbdd: f64,
    calc: f64,
    identity_residual: f64,
}

impl ConverseRow {
    fn ratio(&self) -> f64 {
        self.calc / (self.s_t * self.s_star * self.rbdd)
    }
}

/// Terms needed for `|λ|^k k²` to fall below 1e-16 on every eigenvalue
/// off the vertices.
fn identity_terms(op: &FiniteOperator, e: &UnimodularVertexSet) -> usize {
    let top = op
        .eigenvalues()
        .iter()
        .filter(|l| e.vertices().iter().all(|x| (*x - **l).norm() > VERTEX_TOL))
        .map(|l| l.norm())
        .fold(0.0, f64::max);
    if top >= 1.0 {
        return 4000;
    }
    let mut k = 4000usize;
    while k < 2_000_000 && (k as f64).powi(2) * top.powf(k as f64) > 1e-16 {
        k *= 2;
    }
    k
}

fn converse_instance(config: &ExperimentConfig, index: usize, inst: &Instance) -> Result<ConverseRow> {
    let e = config.domain.vertex_set()?;
    let s = config.domain.s;
    let batch = config.param_usize("x_batch", 30)?.max(1);
    let k_max = config.param_usize("k_max", 1000)?;
    let degree = config.param_usize("family_degree", 6)?;
    let random = config.param_usize("family_random", 4)?;
    let op = &inst.operator;
    let n = op.dim();
    let spec = SquareFunctionSpec::with_alpha(1.0);
    let seed = config.operator.seed ^ (index as u64).wrapping_mul(31);

    let mut xs = random_vectors(seed, n, batch);
    xs.extend(inst.eigenvectors());
    let s_t = square_function_sup(op, &e, &spec, &xs, false)?;
    let mut ys = random_vectors(seed ^ 0xadd, n, batch);
    if let Some(g) = &inst.generated {
        // eigenvectors of T* are the rows of S^{-1}
        ys.extend((0..n).map(|i| g.similarity_inverse.row(i).adjoint()));
    }
    let s_star = square_function_sup(op, &e, &spec, &ys, true)?;

    let family = default_test_family(&e, s, degree, random, seed);
    let mut rbdd: f64 = 0.0;
    for f in &family {
        let p = f.polynomial().expect("test family is polynomial");
        rbdd = rbdd.max(rbdd_family_norms(p, op, &e, s, k_max, 400)?.value);
    }
    let settings = CalculusSettings {
        s,
        ..CalculusSettings::default()
    };
    let calc = calculus_constant(op, &e, &family, &settings)?.value;

    // the identity behind the pairing argument, on a range vector
    let z = random_vectors(seed ^ 0x1d, n, 1).remove(0);
    let x = vertex_factor(op, &e) * z;
    let (_, identity_residual) = identity_reconstruction(op, &e, &x, identity_terms(op, &e))?;
    Ok(ConverseRow {
        normal: inst.is_normal() && op.ambient_p() == 2.0,
        s_t,
        s_star,
        rbdd,
        calc,
        identity_residual: identity_residual / x.norm().max(f64::MIN_POSITIVE),
    })
}

pub fn run_converse(config: &ExperimentConfig) -> Result<ExperimentReport> {
    let cap = config.param_f64("cap", 10.0)?;
    let normal_count = config.param_usize("normal_instances", 10)?;
    let mut report = ExperimentReport::new(config);

    let mut insts = instances(config)?;
    if config.operator.file.is_none() && normal_count > 0 {
        let base = GeneratorSpec::from_config(&config.domain, &config.operator)?.with_cap(1.0).with_p(2.0);
        for i in 0..normal_count {
            let g = generate_ritt_operator(&base.instance(10_000 + i))?;
            insts.push(Instance {
                operator: g.operator.clone(),
                generated: Some(g),
            });
        }
    }
    let rows = per_instance(&insts, |i, inst| converse_instance(config, i, inst))?;

    let zero = Instance {
        operator: FiniteOperator::zero(3, 2.0),
        generated: None,
    };
    let z = converse_instance(config, usize::MAX, &zero)?;
    report.push(Check::holds("zero operator ratio finite", z.ratio().is_finite(), Method::Fitted, 1));
    report.push(Check::info("zero operator ratio", z.ratio(), Method::Fitted, 1));

    let ratios: Vec<f64> = rows.iter().map(|r| r.ratio()).collect();
    report.push(Check::at_most("calculus / (S_T S_* RBdd), batch max", max_of(ratios.iter().copied()), cap, Method::Fitted, rows.len()));
    let normal: Vec<f64> = rows.iter().filter(|r| r.normal).map(|r| r.ratio()).collect();
    if !normal.is_empty() {
        report.push(Check::at_most(
            "normal instances: calculus / (S_T S_* RBdd)",
            max_of(normal.iter().copied()),
            1.0 + 1e-3,
            Method::Fitted,
            normal.len(),
        ));
        let calc_normal = max_of(rows.iter().filter(|r| r.normal).map(|r| r.calc));
        report.push(Check::at_most("normal instances: calculus constant", calc_normal, 1.0 + 1e-6, Method::Fitted, normal.len()));
    }
    let name = "identity Σ c_k T^k Π(I - conj(ξ)T)³ x = x, relative residual";
    let normal_rows: Vec<&ConverseRow> = rows.iter().filter(|r| r.normal).collect();
    if !normal_rows.is_empty() {
        report.push(Check::at_most(
            &format!("{name} (normal)"),
            max_of(normal_rows.iter().map(|r| r.identity_residual)),
            1e-6,
            Method::Exact,
            normal_rows.len(),
        ));
    }
    report.push(
        Check::info(name, max_of(rows.iter().map(|r| r.identity_residual)), Method::Exact, rows.len())
            .with_note("rounding in Π³x is amplified by ‖Π^{-3}‖ on eigenvalues close to a vertex"),
    );
    let table: Vec<Vec<f64>> = rows
        .iter()
        .enumerate()
        .map(|(i, r)| vec![i as f64, r.normal as u8 as f64, r.s_t, r.s_star, r.rbdd, r.calc, r.ratio()])
        .collect();
    report.artifact("constants", csv_table(&["instance", "normal", "s_t", "s_star", "rbdd", "calculus", "ratio"], &table));
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn envelope_dominates_series() {
        let e = UnimodularVertexSet::roots_of_unity(1);
        for alpha in [0.5, 1.0, 2.0] {
            for z in [C64::new(0.5, 0.1), C64::new(0.95, 0.01), C64::new(-0.3, 0.2)] {
                let (s, env) = grid_sum(z, &e, alpha);
                assert!(s <= env, "{alpha} {z}: {s} > {env}");
            }
        }
    }

    #[test]
    fn forward_small_run() {
        let c = defaults_forward().with_param("dimensions", vec![2i64, 3]).with_param("x_batch", 5i64);
        let r = run_forward(&c).unwrap();
        assert!(r.passed(), "{}", r.to_text());
    }
}
