use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::calculus::{HoloFunction, Polynomial};
use crate::error::{Error, Result};
use crate::geometry::{Piece, StolzDomain, UnimodularVertexSet};
use crate::linalg::{self, CMat};
use crate::operator::{spectral_type, FiniteOperator, ResolventEvaluator, VERTEX_TOL};
use crate::quadrature::{quadrature_nodes, QuadratureSpec};
use crate::C64;

/// Quadrature nodes closer than this to a vertex eigenvalue are dropped;
/// the integrand there is `O(|z - ξ|^{s_j - 1})` times a vanishing weight.
const VERTEX_SKIP: f64 = 1e-11;

/// The Dunford integral `(1/2πi) ∮_{∂E_u} φ(z) R(z, T) dz` with resolvents
/// cached at the quadrature nodes, so many functions can share one contour.
#[derive(Debug, Clone)]
pub struct ContourCalculus {
    dim: usize,
    u: f64,
    nodes: Vec<(C64, C64)>,
    resolvents: Vec<Option<CMat>>,
}

impl ContourCalculus {
    pub fn new(
        op: &FiniteOperator,
        vertices: &UnimodularVertexSet,
        u: f64,
        spec: QuadratureSpec,
    ) -> Result<Self> {
        let evaluator = ResolventEvaluator::new(op);
        let type_radius = spectral_type(evaluator.eigenvalues(), vertices).unwrap_or(1.0);
        let domain = StolzDomain::new(vertices.clone(), u)?;
        let inside = evaluator.eigenvalues().iter().all(|&l| {
            domain.vertex_near(l, VERTEX_TOL).is_some() || domain.contains(l)
        });
        if !inside {
            return Err(Error::Contour {
                u,
                type_radius,
                s: f64::NAN,
            });
        }
        let quad = quadrature_nodes(&domain.boundary_path()?, spec)?;
        let vertex_eigen: Vec<C64> = evaluator
            .eigenvalues()
            .iter()
            .copied()
            .filter(|&l| domain.vertex_near(l, VERTEX_TOL).is_some())
            .collect();
        let nodes: Vec<(C64, C64)> = quad.nodes().iter().map(|n| (n.point, n.weight)).collect();
        let resolvents = nodes
            .par_iter()
            .map(|&(z, _)| {
                if vertex_eigen.iter().any(|l| (l - z).norm() <= VERTEX_SKIP) {
                    return Ok(None);
                }
                evaluator.at(z).map(Some)
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            dim: op.dim(),
            u,
            nodes,
            resolvents,
        })
    }

    pub fn u(&self) -> f64 {
        self.u
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    /// `(1/2πi) Σ w f(z) R(z)` for an arbitrary scalar function.
    pub fn apply_fn<F: Fn(C64) -> C64 + Sync>(&self, f: F) -> CMat {
        let n = self.dim;
        // fixed chunking keeps the summation order independent of the thread count
        let partials: Vec<CMat> = self
            .nodes
            .par_chunks(256)
            .zip(self.resolvents.par_chunks(256))
            .map(|(nodes, res)| {
                let mut acc = CMat::zeros(n, n);
                for (&(z, w), r) in nodes.iter().zip(res) {
                    if let Some(r) = r {
                        let c = w * f(z);
                        if c != linalg::zero() {
                            acc += r * c;
                        }
                    }
                }
                acc
            })
            .collect();
        let total = partials.into_iter().fold(CMat::zeros(n, n), |a, b| a + b);
        total / C64::new(0.0, 2.0 * PI)
    }

    /// `φ(T)`; requires `u < s(φ)`.
    pub fn apply(&self, phi: &HoloFunction) -> Result<CMat> {
        if !(self.u < phi.s()) {
            return Err(Error::Contour {
                u: self.u,
                type_radius: f64::NAN,
                s: phi.s(),
            });
        }
        Ok(self.apply_fn(|z| phi.eval(z)))
    }
}

/// `φ(T)` by the contour integral over `∂E_u`.
pub fn contour_calculus(
    phi: &HoloFunction,
    op: &FiniteOperator,
    vertices: &UnimodularVertexSet,
    u: f64,
    spec: QuadratureSpec,
) -> Result<CMat> {
    if !(u < phi.s()) {
        return Err(Error::Contour {
            u,
            type_radius: f64::NAN,
            s: phi.s(),
        });
    }
    ContourCalculus::new(op, vertices, u, spec)?.apply(phi)
}

/// Boundary sample of `∂E_s` with `density` points per piece; segment
/// points are clustered toward the vertex end and the vertices are included.
pub fn boundary_grid(domain: &StolzDomain, density: usize) -> Result<Vec<C64>> {
    let path = domain.boundary_path()?;
    let density = density.max(2);
    let mut points = Vec::with_capacity(density * path.pieces().len());
    for piece in path.pieces() {
        for i in 0..=density {
            let t = i as f64 / density as f64;
            let t = match piece {
                // start of an outgoing segment and end of an incoming one are vertices
                Piece::Segment { start, .. } if start.norm() > domain.radius() + 1e-9 => t * t * t,
                Piece::Segment { .. } => 1.0 - (1.0 - t).powi(3),
                Piece::Arc { .. } => t,
            };
            points.push(piece.point(t));
        }
    }
    Ok(points)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HinfNorm {
    pub value: f64,
    /// Value at doubled density.
    pub refined: f64,
    /// Doubling changed the value by less than 0.1%.
    pub converged: bool,
}

/// `max |φ|` on the boundary grid of `∂E_s`.
pub fn hinf_norm(phi: &HoloFunction, vertices: &UnimodularVertexSet, s: f64, density: usize) -> Result<f64> {
    let domain = StolzDomain::new(vertices.clone(), s)?;
    Ok(boundary_grid(&domain, density)?
        .iter()
        .map(|&z| phi.eval(z).norm())
        .fold(0.0, f64::max))
}

/// [`hinf_norm`] with the grid-doubling self-check.
pub fn hinf_norm_checked(
    phi: &HoloFunction,
    vertices: &UnimodularVertexSet,
    s: f64,
    density: usize,
) -> Result<HinfNorm> {
    let value = hinf_norm(phi, vertices, s, density)?;
    let refined = hinf_norm(phi, vertices, s, 2 * density)?;
    Ok(HinfNorm {
        value,
        refined,
        converged: (refined - value).abs() <= 1e-3 * refined.max(f64::MIN_POSITIVE),
    })
}

/// Settings shared by the calculus-constant estimators.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CalculusSettings {
    pub s: f64,
    /// Contour radius; `None` picks the midpoint between the type and `s`.
    pub u: Option<f64>,
    pub grid_density: usize,
    pub quadrature: QuadratureSpec,
}

impl Default for CalculusSettings {
    fn default() -> Self {
        Self {
            s: 0.9,
            u: None,
            grid_density: 400,
            quadrature: QuadratureSpec::default(),
        }
    }
}

impl CalculusSettings {
    pub fn contour_radius(&self, op: &FiniteOperator, vertices: &UnimodularVertexSet) -> Result<f64> {
        if let Some(u) = self.u {
            return Ok(u);
        }
        let r = spectral_type(&op.eigenvalues(), vertices).ok_or(Error::Contour {
            u: f64::NAN,
            type_radius: 1.0,
            s: self.s,
        })?;
        if !(r < self.s) {
            return Err(Error::Contour {
                u: f64::NAN,
                type_radius: r,
                s: self.s,
            });
        }
        Ok(0.5 * (r + self.s))
    }
}

/// Empirical lower bound for the optimal calculus constant.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CalculusConstant {
    pub value: f64,
    pub argmax: usize,
    pub functions: usize,
}

/// `φ(T)` through Horner for polynomials, through the contour otherwise.
pub fn apply_function(
    phi: &HoloFunction,
    op: &FiniteOperator,
    contour: &mut Option<ContourCalculus>,
    make: impl FnOnce() -> Result<ContourCalculus>,
) -> Result<CMat> {
    if let Some(p) = phi.polynomial() {
        return Ok(p.eval_matrix(op.entries()));
    }
    if contour.is_none() {
        *contour = Some(make()?);
    }
    contour.as_ref().expect("just built").apply(phi)
}

/// `max_φ ‖φ(T)‖ / ‖φ‖_{∞,E_s}` over the family.
pub fn calculus_constant(
    op: &FiniteOperator,
    vertices: &UnimodularVertexSet,
    functions: &[HoloFunction],
    settings: &CalculusSettings,
) -> Result<CalculusConstant> {
    let mut contour = None;
    let mut best = CalculusConstant {
        value: 0.0,
        argmax: 0,
        functions: functions.len(),
    };
    for (i, phi) in functions.iter().enumerate() {
        let value = apply_function(phi, op, &mut contour, || {
            let u = settings.contour_radius(op, vertices)?;
            ContourCalculus::new(op, vertices, u, settings.quadrature)
        })?;
        let sup = hinf_norm(phi, vertices, settings.s, settings.grid_density)?;
        if sup == 0.0 {
            continue;
        }
        let ratio = op.norm_of(&value) / sup;
        if ratio > best.value {
            best.value = ratio;
            best.argmax = i;
        }
    }
    Ok(best)
}

/// Default test family: `z^k Π(1 - conj(ξ_j) z)` for `k ≤ max_degree`
/// plus `random` seeded random polynomials times the vertex product.
pub fn default_test_family(
    vertices: &UnimodularVertexSet,
    s: f64,
    max_degree: usize,
    random: usize,
    seed: u64,
) -> Vec<HoloFunction> {
    let base = Polynomial::vertex_power(vertices, 1);
    let mut family: Vec<HoloFunction> = (0..=max_degree)
        .map(|k| HoloFunction::from_polynomial(base.mul(&Polynomial::monomial(k)), vertices, s))
        .collect();
    let mut rng = crate::random::rng(seed);
    for _ in 0..random {
        let deg = 1 + (rand::Rng::gen_range(&mut rng, 0..max_degree.max(1)));
        let coeffs = crate::random::random_complex_vector(&mut rng, deg + 1);
        let p = Polynomial::new(coeffs.iter().copied().collect()).mul(&base);
        family.push(HoloFunction::from_polynomial(p, vertices, s));
    }
    family
}

/// `‖φ(ρT) - φ(T)‖` for each `ρ`, all on the same contour `∂E_u`.
pub fn phi_rho_convergence(
    phi: &HoloFunction,
    op: &FiniteOperator,
    vertices: &UnimodularVertexSet,
    rhos: &[f64],
    settings: &CalculusSettings,
) -> Result<Vec<f64>> {
    let u = settings.contour_radius(op, vertices)?;
    let base = ContourCalculus::new(op, vertices, u, settings.quadrature)?.apply(phi)?;
    rhos.iter()
        .map(|&rho| {
            let scaled = op.scaled(rho);
            let value = ContourCalculus::new(&scaled, vertices, u, settings.quadrature)?.apply(phi)?;
            Ok(op.norm_of(&(value - &base)))
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RbddFamily {
    pub value: f64,
    pub argmax_k: usize,
    pub hinf: f64,
}

/// `max_{k ≤ k_max} k ‖φ(T) T^{k-1} Π(I - conj(ξ_j) T)‖ / ‖φ‖_{∞,E_s}` for
/// polynomial `φ` divisible by `Π(1 - conj(ξ_j) z)`.
pub fn rbdd_family_norms(
    phi: &Polynomial,
    op: &FiniteOperator,
    vertices: &UnimodularVertexSet,
    s: f64,
    k_max: usize,
    grid_density: usize,
) -> Result<RbddFamily> {
    phi.divide_exact(&Polynomial::vertex_power(vertices, 1))?;
    let f = HoloFunction::from_polynomial(phi.clone(), vertices, s);
    let hinf = hinf_norm(&f, vertices, s, grid_density)?;
    let head = phi.eval_matrix(op.entries()) * crate::operator::vertex_factor(op, vertices);
    let mut term = head;
    let mut best = RbddFamily {
        value: 0.0,
        argmax_k: 1,
        hinf,
    };
    for k in 1..=k_max.max(1) {
        if k > 1 {
            term = &term * op.entries();
        }
        let v = k as f64 * op.norm_of(&term) / hinf;
        if v > best.value {
            best.value = v;
            best.argmax_k = k;
        }
        if linalg::frobenius(&term) == 0.0 {
            break;
        }
    }
    Ok(best)
}
