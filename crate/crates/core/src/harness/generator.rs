//! Seeded random Ritt_E instances.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{StolzDomain, UnimodularVertexSet};
use crate::harness::config::{DomainSpec, OperatorSpec};
use crate::linalg::{self, CMat};
use crate::operator::FiniteOperator;
use crate::random::{complex_normal, substream};
use crate::C64;

/// Parameters of [`generate_ritt_operator`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeneratorSpec {
    pub vertices: UnimodularVertexSet,
    pub dimension: usize,
    pub p: f64,
    /// Eigenvalues are drawn from `E_{spectral_radius}`.
    pub spectral_radius: f64,
    pub vertex_mass: f64,
    pub vertex_exponents: [f64; 2],
    pub vertex_eigenvalues: bool,
    pub condition_cap: f64,
    pub seed: u64,
}

impl GeneratorSpec {
    pub fn new(vertices: UnimodularVertexSet, dimension: usize, spectral_radius: f64, seed: u64) -> Self {
        Self {
            vertices,
            dimension,
            p: 2.0,
            spectral_radius,
            vertex_mass: 0.4,
            vertex_exponents: [0.5, 3.0],
            vertex_eigenvalues: false,
            condition_cap: 1.0,
            seed,
        }
    }

    pub fn from_config(domain: &DomainSpec, op: &OperatorSpec) -> Result<Self> {
        Ok(Self {
            vertices: domain.vertex_set()?,
            dimension: op.dimension,
            p: op.p,
            spectral_radius: op.spectral_radius.unwrap_or(domain.r),
            vertex_mass: op.vertex_mass,
            vertex_exponents: op.vertex_exponents,
            vertex_eigenvalues: op.vertex_eigenvalues,
            condition_cap: op.condition_cap,
            seed: op.seed,
        })
    }

    pub fn with_cap(mut self, cap: f64) -> Self {
        self.condition_cap = cap;
        self
    }

    pub fn with_p(mut self, p: f64) -> Self {
        self.p = p;
        self
    }

    /// The same spec with the seed of instance `i` of a batch.
    pub fn instance(&self, i: usize) -> Self {
        let mut s = self.clone();
        s.seed = self.seed.wrapping_mul(0x9E37_79B9_7F4A_7C15).wrapping_add(i as u64);
        s
    }
}

/// A generated operator with the data used to build it.
#[derive(Debug, Clone, PartialEq)]
pub struct GeneratedOperator {
    pub operator: FiniteOperator,
    pub eigenvalues: Vec<C64>,
    /// `T = S diag(λ) S^{-1}`.
    pub similarity: CMat,
    pub similarity_inverse: CMat,
}

/// Uniform sample of the region, by rejection from the unit disc.
fn bulk_point<R: Rng>(rng: &mut R, domain: &StolzDomain) -> C64 {
    loop {
        let z = C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
        if z.norm() < 1.0 && domain.contains(z) {
            return z;
        }
    }
}

/// Point at distance `d` from `ξ` inside the Stolz angle of `E_r`
/// (half-opening `asin r` around the inward radius).
fn near_vertex_point<R: Rng>(rng: &mut R, xi: C64, d: f64, domain: &StolzDomain) -> C64 {
    let half = domain.radius().asin();
    loop {
        let psi = rng.gen_range(-0.9..0.9) * half;
        let z = xi * (1.0 - C64::from_polar(d, psi));
        if domain.contains(z) {
            return z;
        }
    }
}

fn unitary<R: Rng>(rng: &mut R, n: usize) -> CMat {
    let g = CMat::from_fn(n, n, |_, _| complex_normal(rng));
    let qr = g.qr();
    let (q, r) = (qr.q(), qr.r());
    // fix the phases so Q is Haar distributed
    let phases: Vec<C64> = (0..n)
        .map(|i| {
            let d = r[(i, i)];
            if d.norm() > 0.0 {
                d / d.norm()
            } else {
                linalg::one()
            }
        })
        .collect();
    q * linalg::diag(&phases)
}

/// Random operator with spectrum in `E_{spectral_radius}`: a fraction
/// `vertex_mass` of the eigenvalues at distance `10^{-u}` from a random
/// vertex inside its Stolz angle, the rest uniform in
/// `E_{spectral_radius/2}` (or the smallest admissible radius), conjugated
/// by `S = U diag(σ) V` with `σ` log-uniform in `[1, cap]` so that
/// `cond(S) ≤ cap`; `cap = 1` gives a normal operator.
pub fn generate_ritt_operator(spec: &GeneratorSpec) -> Result<GeneratedOperator> {
    let n = spec.dimension;
    if n == 0 {
        return Err(Error::Precondition("dimension must be at least 1".into()));
    }
    if !(spec.condition_cap >= 1.0) {
        return Err(Error::Domain {
            name: "condition_cap",
            value: spec.condition_cap,
            expected: "cap >= 1",
        });
    }
    let region = StolzDomain::new(spec.vertices.clone(), spec.spectral_radius)?;
    let bulk_radius = (0.5 * spec.spectral_radius).max(spec.vertices.min_large_enough_radius());
    let bulk = StolzDomain::new(spec.vertices.clone(), bulk_radius.min(spec.spectral_radius))?;
    let mut rng = substream(spec.seed, 0);
    let mut eigenvalues = Vec::with_capacity(n);
    if spec.vertex_eigenvalues {
        eigenvalues.extend(spec.vertices.vertices().iter().take(n).copied());
    }
    let [lo, hi] = spec.vertex_exponents;
    while eigenvalues.len() < n {
        if rng.gen::<f64>() < spec.vertex_mass {
            let j = rng.gen_range(0..spec.vertices.len());
            let u = if hi > lo { rng.gen_range(lo..hi) } else { lo };
            eigenvalues.push(near_vertex_point(&mut rng, spec.vertices.vertex(j), 10f64.powf(-u), &region));
        } else {
            eigenvalues.push(bulk_point(&mut rng, &bulk));
        }
    }
    let (s, s_inv) = if spec.condition_cap == 1.0 {
        let u = unitary(&mut rng, n);
        let ui = u.adjoint();
        (u, ui)
    } else {
        let u = unitary(&mut rng, n);
        let v = unitary(&mut rng, n);
        let log_cap = spec.condition_cap.ln();
        let mut sigma: Vec<f64> = (0..n).map(|_| (rng.gen::<f64>() * log_cap).exp()).collect();
        if n > 1 {
            sigma[0] = 1.0;
        }
        let d: Vec<C64> = sigma.iter().map(|&x| C64::new(x, 0.0)).collect();
        let di: Vec<C64> = sigma.iter().map(|&x| C64::new(1.0 / x, 0.0)).collect();
        (&u * linalg::diag(&d) * &v, v.adjoint() * linalg::diag(&di) * u.adjoint())
    };
    let entries = &s * linalg::diag(&eigenvalues) * &s_inv;
    Ok(GeneratedOperator {
        operator: FiniteOperator::new(entries, spec.p)?,
        eigenvalues,
        similarity: s,
        similarity_inverse: s_inv,
    })
}

/// Instances `0..count` of the spec, each from its own seed.
pub fn generate_batch(spec: &GeneratorSpec, count: usize) -> Result<Vec<GeneratedOperator>> {
    (0..count).map(|i| generate_ritt_operator(&spec.instance(i))).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operator::{classify_ritt, spectral_type};
    use crate::rademacher::{square_function, SquareFunctionSpec};

    #[test]
    fn normal_instances_are_ritt() {
        let spec = GeneratorSpec::new(UnimodularVertexSet::roots_of_unity(2), 4, 0.6, 3);
        let g = generate_ritt_operator(&spec).unwrap();
        let m = g.operator.entries();
        assert!((m * m.adjoint() - m.adjoint() * m).norm() < 1e-12);
        let cl = classify_ritt(&g.operator, &spec.vertices);
        assert!(cl.is_ritt, "{cl:?} {:?}", g.eigenvalues);
        let t = spectral_type(&g.eigenvalues, &spec.vertices).unwrap();
        assert!(t <= 0.6 + 1e-12);
    }

    #[test]
    fn similarity_condition_is_capped() {
        let spec = GeneratorSpec::new(UnimodularVertexSet::roots_of_unity(3), 5, 0.6, 8).with_cap(50.0);
        for i in 0..5 {
            let g = generate_ritt_operator(&spec.instance(i)).unwrap();
            let cond = linalg::condition_number(&g.similarity);
            assert!(cond <= 50.0 * (1.0 + 1e-9), "{cond}");
            let prod = &g.similarity * &g.similarity_inverse;
            assert!((prod - linalg::identity(5)).norm() < 1e-10);
        }
    }

    #[test]
    fn seeded_runs_are_bitwise_identical() {
        let spec = GeneratorSpec::new(UnimodularVertexSet::roots_of_unity(1), 6, 0.6, 42).with_cap(10.0);
        let a = generate_ritt_operator(&spec).unwrap();
        let b = generate_ritt_operator(&spec).unwrap();
        assert_eq!(a.operator.entries(), b.operator.entries());
        let c = generate_ritt_operator(&spec.instance(1)).unwrap();
        assert_ne!(a.operator.entries(), c.operator.entries());
    }

    #[test]
    fn forced_vertex_eigenvalue_kills_square_functions() {
        let mut spec = GeneratorSpec::new(UnimodularVertexSet::roots_of_unity(1), 3, 0.6, 5);
        spec.vertex_eigenvalues = true;
        let g = generate_ritt_operator(&spec).unwrap();
        assert_eq!(g.eigenvalues[0], C64::new(1.0, 0.0));
        let v = g.similarity.column(0).into_owned();
        let sf = square_function(&g.operator, &spec.vertices, &SquareFunctionSpec::with_alpha(1.0), &v).unwrap();
        // roundoff of S D S^{-1}, nothing structural
        assert!(sf.value.value < 1e-10 * v.norm(), "{}", sf.value.value);
    }
}
