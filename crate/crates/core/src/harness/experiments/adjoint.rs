//! R-bounds of operator families against those of the adjoint families.

use crate::error::Result;
use crate::geometry::StolzDomain;
use crate::harness::config::ExperimentConfig;
use crate::harness::experiments::{instances, max_of, per_instance};
use crate::harness::report::{csv_table, Check, ExperimentReport, Method};
use crate::linalg::{self, CMat};
use crate::operator::{spectral_type, vertex_factor, FiniteOperator, RittMesh};
use crate::rademacher::{r_bound_estimate, RBoundSettings, RadRequest, RadSettings};
use crate::C64;

pub fn defaults() -> ExperimentConfig {
    let mut c = ExperimentConfig::new("exp_adjoint_rbound")
        .with_param("ratio_cap", 4.0)
        .with_param("power_terms", 64i64)
        .with_param("mesh_angular", 12i64)
        .with_param("mesh_radial", 5i64)
        .with_param("trials", 48i64);
    c.operator.condition_cap = 10.0;
    c
}

fn settings(config: &ExperimentConfig) -> Result<RBoundSettings> {
    Ok(RBoundSettings {
        trials: config.param_usize("trials", 48)?,
        family_size: 4,
        rad: RadSettings {
            request: RadRequest::Auto,
            samples: 1 << 12,
            seed: config.operator.seed,
        },
    })
}

fn adjoints(ops: &[CMat]) -> Vec<CMat> {
    ops.iter().map(|m| m.adjoint()).collect()
}

/// `Π_j (1 - conj(ξ_j) z) R(z, T)` on a mesh outside `E_s`, with `s`
/// halfway between the spectral type and 1.
fn resolvent_family(op: &FiniteOperator, config: &ExperimentConfig) -> Result<Vec<CMat>> {
    let e = config.domain.vertex_set()?;
    let t = spectral_type(&op.eigenvalues(), &e).unwrap_or(config.domain.r);
    let domain = StolzDomain::new(e.clone(), 0.5 * (t + 1.0))?;
    let mesh = RittMesh {
        angular: config.param_usize("mesh_angular", 12)?,
        radial: config.param_usize("mesh_radial", 5)?,
        min_distance: 1e-3,
    };
    mesh.points(&domain)
        .into_iter()
        .map(|z| Ok(op.resolvent(z)? * e.vertex_product(z)))
        .collect()
}

/// `n T^{n-1} Π_j (I - conj(ξ_j) T)` for `n = 1..=terms`.
fn power_family(op: &FiniteOperator, config: &ExperimentConfig, terms: usize) -> Result<Vec<CMat>> {
    let e = config.domain.vertex_set()?;
    let mut current = vertex_factor(op, &e);
    let mut out = Vec::with_capacity(terms);
    for n in 1..=terms {
        out.push(&current * C64::new(n as f64, 0.0));
        current = op.entries() * current;
    }
    Ok(out)
}

pub fn run(config: &ExperimentConfig) -> Result<ExperimentReport> {
    let cap = config.param_f64("ratio_cap", 4.0)?;
    let terms = config.param_usize("power_terms", 64)?.max(1);
    let rb = settings(config)?;
    let p = config.operator.p;
    let q = linalg::dual_exponent(p);
    let mut report = ExperimentReport::new(config);

    // {I}: every Rademacher ratio is 1
    let n = config.operator.dimension;
    let id = r_bound_estimate(&[linalg::identity(n)], p, &rb);
    let method = Method::from(id.method);
    report.push(Check::at_most("R-bound of {I} minus 1", (id.value - 1.0).abs(), 1e-12, method, id.samples));

    // commuting diagonals on l²: Rademacher sums see only |d|, so F and F*
    // must give the same estimate
    let diag: Vec<CMat> = (1..=6)
        .map(|k| {
            let d: Vec<C64> = (0..n).map(|i| C64::from_polar(0.3 + 0.1 * i as f64, (k * (i + 2)) as f64)).collect();
            linalg::diag(&d)
        })
        .collect();
    let a = r_bound_estimate(&diag, 2.0, &rb).value;
    let b = r_bound_estimate(&adjoints(&diag), 2.0, &rb).value;
    report.push(Check::at_most("commuting diagonals on l²: |R(F) - R(F*)| / R(F)", (a - b).abs() / a, 1e-12, Method::Exact, diag.len()));

    let insts = instances(config)?;
    let rows = per_instance(&insts, |_, inst| {
        let op = &inst.operator;
        let families = [resolvent_family(op, config)?, power_family(op, config, terms)?];
        Ok(families
            .iter()
            .map(|f| {
                let forward = r_bound_estimate(f, p, &rb).value;
                let dual = r_bound_estimate(&adjoints(f), q, &rb).value;
                (f.len(), forward, dual)
            })
            .collect::<Vec<_>>())
    })?;

    let names = ["resolvent products", "power family"];
    let mut table = Vec::new();
    for (k, name) in names.iter().enumerate() {
        let ratio = max_of(rows.iter().map(|r| {
            let (_, f, d) = r[k];
            (f / d).max(d / f)
        }));
        let finite = rows.iter().all(|r| r[k].1.is_finite() && r[k].2.is_finite());
        let members: usize = rows.iter().map(|r| r[k].0).sum();
        report.push(Check::holds(&format!("estimates finite [{name}]"), finite, method, members));
        report.push(Check::at_most(&format!("max(R(F)/R(F*), R(F*)/R(F)) [{name}]"), ratio, cap, method, members));
        for (i, r) in rows.iter().enumerate() {
            table.push(vec![i as f64, k as f64, r[k].0 as f64, r[k].1, r[k].2]);
        }
    }
    report.artifact("rbounds", csv_table(&["instance", "family", "members", "r_bound", "r_bound_adjoint"], &table));
    Ok(report)
}
