//! Acceptance run: one PASS/FAIL line per criterion, with the measured value,
//! the tolerance and the wall time. Exits nonzero if any criterion fails.
//!
//! Run with `cargo test --test acceptance`.

use std::process::ExitCode;
use std::time::Instant;

use rand::Rng;
use ritt_calculus::calculus::{ContourCalculus, HoloFunction, Polynomial};
use ritt_calculus::geometry::UnimodularVertexSet;
use ritt_calculus::harness::generator::{generate_ritt_operator, GeneratorSpec};
use ritt_calculus::harness::report::{Check, Relation};
use ritt_calculus::harness::{self, ExperimentReport};
use ritt_calculus::linalg::{CMat, CVec};
use ritt_calculus::operator::FiniteOperator;
use ritt_calculus::quadrature::QuadratureSpec;
use ritt_calculus::rademacher::{
    enumerate_rad, hilbert_rad, monte_carlo_rad, square_function, SquareFunctionSpec, VectorFamily,
};
use ritt_calculus::random::{random_complex_vector, rng, substream};
use ritt_calculus::C64;

struct Outcome {
    pass: bool,
    summary: String,
    details: Vec<String>,
}

impl Outcome {
    fn new(pass: bool, summary: String) -> Self {
        Self {
            pass,
            summary,
            details: Vec::new(),
        }
    }
}

fn rel(a: &CMat, b: &CMat) -> f64 {
    (a - b).norm() / b.norm().max(f64::MIN_POSITIVE)
}

fn vertex_sets() -> [UnimodularVertexSet; 3] {
    [1, 2, 3].map(UnimodularVertexSet::roots_of_unity)
}

/// Random polynomial of degree ≤ 12 divisible by `Π(1 - conj(ξ_j) z)`.
fn divisible_polynomial<R: Rng>(r: &mut R, e: &UnimodularVertexSet) -> Polynomial {
    let factor = Polynomial::vertex_power(e, 1);
    let deg = r.gen_range(0..=12 - e.len());
    let q: Vec<C64> = random_complex_vector(r, deg + 1).iter().copied().collect();
    Polynomial::new(q).mul(&factor)
}

struct CalculusBatch {
    oracle: f64,
    contour_shift: f64,
    homomorphism: f64,
}

/// The shared batch: 100 operators of dimension ≤ 6 with spectra in
/// `E_0.6` and similarity condition ≤ 50, 20 polynomials each.
fn calculus_batch() -> ritt_calculus::Result<CalculusBatch> {
    let sets = vertex_sets();
    let spec = QuadratureSpec::default();
    let mut out = CalculusBatch {
        oracle: 0.0,
        contour_shift: 0.0,
        homomorphism: 0.0,
    };
    for i in 0..100 {
        let e = &sets[i % 3];
        let dim = 1 + i % 6;
        let g = generate_ritt_operator(&GeneratorSpec::new(e.clone(), dim, 0.6, 1000 + i as u64).with_cap(50.0))?;
        let op = &g.operator;
        let c7 = ContourCalculus::new(op, e, 0.7, spec)?;
        let c8 = ContourCalculus::new(op, e, 0.8, spec)?;
        let mut r = substream(77, i as u64);
        let polys: Vec<Polynomial> = (0..20).map(|_| divisible_polynomial(&mut r, e)).collect();
        for (k, p) in polys.iter().enumerate() {
            let phi = HoloFunction::from_polynomial(p.clone(), e, 0.9);
            let horner = p.eval_matrix(op.entries());
            let a = c7.apply(&phi)?;
            let b = c8.apply(&phi)?;
            out.oracle = out.oracle.max(rel(&b, &horner));
            out.contour_shift = out.contour_shift.max(rel(&a, &b));

            let q = &polys[(k + 1) % polys.len()];
            let psi = HoloFunction::from_polynomial(q.clone(), e, 0.9);
            let prod = c8.apply(&phi.product(&psi))?;
            let composed = &b * c8.apply(&psi)?;
            out.homomorphism = out.homomorphism.max(rel(&prod, &composed));
        }
    }
    Ok(out)
}

fn square_function_closed_forms() -> ritt_calculus::Result<Outcome> {
    let one = UnimodularVertexSet::roots_of_unity(1);
    let spec = SquareFunctionSpec::with_alpha(1.0);
    let mut r = rng(4);
    let x = random_complex_vector(&mut r, 4);

    let half = FiniteOperator::diagonal(&[C64::new(0.5, 0.0); 4], 2.0)?;
    let v = square_function(&half, &one, &spec, &x)?.value.value;
    let half_err = (v - 2.0 / 3.0 * x.norm()).abs() / x.norm();

    let zero = FiniteOperator::zero(4, 2.0);
    let zero_err = (square_function(&zero, &one, &spec, &x)?.value.value - x.norm()).abs();

    // e_1 spans ker(I - T) for T = diag(1, 1/2)
    let t = FiniteOperator::diagonal(&[C64::new(1.0, 0.0), C64::new(0.5, 0.0)], 2.0)?;
    let kernel = CVec::from_vec(vec![C64::new(1.0, 0.0), C64::new(0.0, 0.0)]);
    let kernel_val = square_function(&t, &one, &spec, &kernel)?.value.value;

    let pass = half_err <= 1e-9 && zero_err == 0.0 && kernel_val == 0.0;
    Ok(Outcome::new(
        pass,
        format!("diag(0.5) rel err {half_err:.2e} <= 1e-9; T = 0 err {zero_err:.1e} == 0; kernel value {kernel_val:.1e} == 0"),
    ))
}

fn rademacher_estimator() -> Outcome {
    let mut within = 0usize;
    let mut cases = 0usize;
    let mut hilbert: f64 = 0.0;
    for i in 0..50u64 {
        let mut r = substream(12, i);
        let k = 2 + (i as usize) % 11;
        let n = 2 + (i as usize) % 4;
        let members: Vec<CVec> = (0..k).map(|_| random_complex_vector(&mut r, n)).collect();
        for p in [1.0, f64::INFINITY] {
            let fam = VectorFamily::new(members.clone(), p).expect("valid family");
            let exact = enumerate_rad(&fam).value;
            let mc = monte_carlo_rad(&fam, 1 << 14, 1000 + i);
            cases += 1;
            if (mc.value - exact).abs() <= 3.0 * mc.std_error {
                within += 1;
            }
        }
        let fam = VectorFamily::new(members, 2.0).expect("valid family");
        let (e, h) = (enumerate_rad(&fam).value, hilbert_rad(&fam).value);
        hilbert = hilbert.max((e - h).abs() / h);
    }
    let frac = within as f64 / cases as f64;
    Outcome::new(
        frac >= 0.99 && hilbert <= 1e-12,
        format!("MC within 3 s.e. in {within}/{cases} = {frac:.3} >= 0.99; p = 2 enumeration vs closed form {hilbert:.2e} <= 1e-12"),
    )
}

fn describe(c: &Check) -> String {
    let verdict = if c.pass { "ok  " } else { "FAIL" };
    match (c.relation, c.bound) {
        (Relation::AtMost, Some(b)) => format!("{verdict} {}: {:.4e} <= {:.4e}", c.name, c.value, b),
        (Relation::AtLeast, Some(b)) => format!("{verdict} {}: {:.4e} >= {:.4e}", c.name, c.value, b),
        (Relation::Holds, _) => format!("{verdict} {}: {}", c.name, c.value == 1.0),
        _ => format!("info {}: {:.4e}", c.name, c.value),
    }
}

/// Verdict over the asserted checks of `report` selected by `pick`.
fn from_report(report: &ExperimentReport, pick: impl Fn(&Check) -> bool, time_limit: Option<f64>) -> Outcome {
    let chosen: Vec<&Check> = report.checks.iter().filter(|c| pick(c)).collect();
    let asserted: Vec<&&Check> = chosen.iter().filter(|c| c.asserted()).collect();
    let failed = asserted.iter().filter(|c| !c.pass).count();
    let mut pass = failed == 0 && !asserted.is_empty();
    let mut summary = format!("{} of {} checks of {} hold", asserted.len() - failed, asserted.len(), report.experiment);
    if let Some(limit) = time_limit {
        pass &= report.wall_time_s <= limit;
        summary.push_str(&format!("; runtime {:.1} s <= {limit} s", report.wall_time_s));
    }
    let mut out = Outcome::new(pass, summary);
    out.details = chosen.iter().map(|c| describe(c)).collect();
    out
}

fn run(name: &str) -> ExperimentReport {
    harness::run_experiment(name, None, &[]).unwrap_or_else(|e| panic!("{name}: {e}"))
}

fn main() -> ExitCode {
    let mut results: Vec<(usize, &str, Outcome, f64)> = Vec::new();
    let mut record = |id, name, outcome: Outcome, secs: f64| {
        let tag = if outcome.pass { "PASS" } else { "FAIL" };
        println!("{tag} [{id:>2}] {name} — {} ({secs:.1} s)", outcome.summary);
        for d in &outcome.details {
            println!("         {d}");
        }
        results.push((id, name, outcome, secs));
    };

    let t = Instant::now();
    let batch = calculus_batch().expect("calculus batch");
    let secs = t.elapsed().as_secs_f64();
    record(
        1,
        "polynomial oracle",
        Outcome::new(
            batch.oracle <= 1e-7 && secs <= 120.0,
            format!("max rel err {:.2e} <= 1e-7; runtime {secs:.1} s <= 120 s", batch.oracle),
        ),
        secs,
    );
    record(
        2,
        "contour independence",
        Outcome::new(batch.contour_shift <= 1e-7, format!("u = 0.7 vs 0.8: max rel diff {:.2e} <= 1e-7", batch.contour_shift)),
        secs,
    );
    record(
        3,
        "homomorphism",
        Outcome::new(batch.homomorphism <= 1e-7, format!("max rel err {:.2e} <= 1e-7", batch.homomorphism)),
        secs,
    );

    let t = Instant::now();
    let sq = square_function_closed_forms().expect("square functions");
    record(4, "square-function closed forms", sq, t.elapsed().as_secs_f64());

    let eq = run("exp_sqfn_equivalence");
    record(5, "square-function equivalence envelope", from_report(&eq, |_| true, Some(300.0)), eq.wall_time_s);

    let co = run("exp_coefficients");
    record(6, "coefficient growth", from_report(&co, |_| true, None), co.wall_time_s);

    let ap = run("exp_approximation");
    record(7, "power-family plateau", from_report(&ap, |c| c.name.contains("plateau"), None), ap.wall_time_s);

    let fm = run("exp_fm");
    record(
        8,
        "FM reconstruction",
        from_report(&fm, |c| c.name.contains("max error") || c.name.contains("error ratio"), Some(600.0)),
        fm.wall_time_s,
    );
    record(9, "FM decay", from_report(&fm, |c| c.name.contains("decay"), None), fm.wall_time_s);
    record(10, "FM half-power sum", from_report(&fm, |c| c.name.contains("half-power"), None), fm.wall_time_s);

    let er = run("exp_ergodic");
    record(11, "ergodic rate", from_report(&er, |_| true, None), er.wall_time_s);

    let t = Instant::now();
    record(12, "Rademacher estimator", rademacher_estimator(), t.elapsed().as_secs_f64());

    let sh = run("exp_sqfn_implies_hinf");
    record(13, "calculus vs square-function constants", from_report(&sh, |_| true, None), sh.wall_time_s);

    record(
        14,
        "ρ-approximation",
        from_report(&ap, |c| c.name.contains("φ(ρT)") || c.name.contains("square-function"), None),
        ap.wall_time_s,
    );

    let failed: Vec<String> = results.iter().filter(|r| !r.2.pass).map(|r| r.0.to_string()).collect();
    println!(
        "acceptance: {} of {} criteria pass{}",
        results.len() - failed.len(),
        results.len(),
        if failed.is_empty() {
            String::new()
        } else {
            format!("; failing: {}", failed.join(", "))
        }
    );
    if failed.is_empty() {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
