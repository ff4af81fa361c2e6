//! Ritt_E constants, type classification and power-family bounds.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::TAU;

use crate::error::{Error, Result};
use crate::geometry::{is_e_large_enough, StolzDomain, UnimodularVertexSet};
use crate::linalg::{self, CMat};
use crate::operator::spectral::fractional_factor_with;
use crate::operator::{FiniteOperator, ResolventEvaluator};
use crate::C64;

/// Eigenvalues this close to a vertex count as sitting on it.
pub const VERTEX_TOL: f64 = 1e-9;
/// Smallest type radius reported by [`classify_ritt`].
pub const TYPE_FLOOR: f64 = 0.01;
/// Relative growth from the mesh to its refinement toward the boundary and
/// the vertices tolerated by the plateau test of [`classify_ritt`].
pub const PLATEAU_TOL: f64 = 0.05;

/// Sampling mesh for the exterior of `E_s` inside `D(0, 2)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RittMesh {
    /// Directions per ring family.
    pub angular: usize,
    /// Log-graded layers per ring family.
    pub radial: usize,
    /// Closest approach to `∂E_s` and to the vertices.
    pub min_distance: f64,
}

impl Default for RittMesh {
    fn default() -> Self {
        Self {
            angular: 64,
            radial: 16,
            min_distance: 1e-6,
        }
    }
}

impl RittMesh {
    /// Mesh points outside `E̅_s`: rays from `∂E_s` out to `|z| = 2`, and
    /// rings around each vertex, both with log-graded distances.
    pub fn points(&self, domain: &StolzDomain) -> Vec<C64> {
        self.layered(domain, self.min_distance, None)
    }

    /// The same rays and rings at `radial` log-graded distances in
    /// `[depth, min_distance)`, closer in than every point of [`points`](Self::points).
    pub fn inner_points(&self, domain: &StolzDomain, depth: f64) -> Vec<C64> {
        self.layered(domain, depth, Some(self.min_distance))
    }

    fn layered(&self, domain: &StolzDomain, lo: f64, top: Option<f64>) -> Vec<C64> {
        let radial = self.radial.max(2);
        let angular = self.angular.max(4);
        let lo = lo.max(1e-15).ln();
        let layer = |i: usize, hi: f64| match top {
            Some(t) => (lo + (t.ln() - lo) * i as f64 / radial as f64).exp(),
            None => (lo + (hi.ln() - lo) * i as f64 / (radial - 1) as f64).exp(),
        };
        let mut points = Vec::with_capacity(angular * radial * (1 + domain.vertices().len()));
        for a in 0..angular {
            let phi = TAU * (a as f64 + 0.5) / angular as f64;
            let b = domain.radial_boundary(phi);
            let dir = C64::from_polar(1.0, phi);
            for i in 0..radial {
                points.push(dir * (b + layer(i, 2.0 - b)));
            }
        }
        for &x in domain.vertices().vertices() {
            for a in 0..angular {
                let psi = TAU * (a as f64 + 0.5) / angular as f64;
                let dir = C64::from_polar(1.0, psi);
                for i in 0..radial {
                    points.push(x + dir * layer(i, 1.0));
                }
            }
        }
        points.retain(|&z| z.norm() < 2.0 && domain.margin(z) < 0.0);
        points
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RittConstant {
    pub value: f64,
    pub argmax: C64,
    pub samples: usize,
}

/// Outcome of [`classify_ritt`]. The type is the smallest E-large-enough
/// `r` with `σ(T) ⊂ E̅_r` (vertex eigenvalues allowed); `constant` is the
/// sampled resolvent-product supremum outside `E̅_s` for `s` halfway between
/// the type and 1, accepted only if refining the mesh toward the boundary
/// and the vertices does not make it grow.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RittClassification {
    pub is_ritt: bool,
    pub type_estimate: f64,
    pub constant: f64,
    pub samples_used: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PowerFamilyBound {
    pub value: f64,
    pub argmax_n: usize,
    pub argmax_rho: f64,
}

fn spectrum_inside(eigenvalues: &[C64], domain: &StolzDomain) -> Result<()> {
    for &l in eigenvalues {
        let at_vertex = domain.vertex_near(l, VERTEX_TOL).is_some();
        if !at_vertex && !domain.contains(l) {
            return Err(Error::SpectrumOutside { re: l.re, im: l.im });
        }
    }
    Ok(())
}

/// Supremum of `‖Π(1 - conj(ξ_j) z) R(z, T)‖` over the mesh outside `E̅_s`.
pub fn ritt_constant(
    op: &FiniteOperator,
    vertices: &UnimodularVertexSet,
    s: f64,
    mesh: &RittMesh,
) -> Result<RittConstant> {
    let domain = StolzDomain::new(vertices.clone(), s)?;
    sup_over(op, vertices, &domain, &mesh.points(&domain))
}

fn sup_over(
    op: &FiniteOperator,
    vertices: &UnimodularVertexSet,
    domain: &StolzDomain,
    points: &[C64],
) -> Result<RittConstant> {
    let evaluator = ResolventEvaluator::new(op);
    spectrum_inside(evaluator.eigenvalues(), domain)?;
    let values: Vec<Result<f64>> = points
        .par_iter()
        .map(|&z| {
            let r = evaluator.at(z)?;
            Ok(op.norm_of(&(r * vertices.vertex_product(z))))
        })
        .collect();
    let mut best = RittConstant {
        value: 0.0,
        argmax: C64::new(0.0, 0.0),
        samples: points.len(),
    };
    for (z, v) in points.iter().zip(values) {
        let v = v?;
        if v > best.value {
            best.value = v;
            best.argmax = *z;
        }
    }
    Ok(best)
}

/// Smallest `r` in `[floor, 1)` with `λ ∈ E̅_r`, or `None` if none.
fn containing_radius(vertices: &UnimodularVertexSet, l: C64, floor: f64) -> Option<f64> {
    let closed = |r: f64| {
        StolzDomain::new(vertices.clone(), r)
            .map(|d| d.margin(l) >= -1e-12)
            .unwrap_or(false)
    };
    if closed(floor) {
        return Some(floor);
    }
    let top = 1.0 - 1e-9;
    if !closed(top) {
        return None;
    }
    let (mut lo, mut hi) = (floor, top);
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        if closed(mid) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Some(hi)
}

/// Smallest E-large-enough radius `r ≥ 0.01` with every eigenvalue in
/// `E̅_r` or on a vertex; `None` when no `r < 1` works.
pub fn spectral_type(eigenvalues: &[C64], vertices: &UnimodularVertexSet) -> Option<f64> {
    let floor = TYPE_FLOOR.max(vertices.min_large_enough_radius());
    let mut r = floor;
    for &l in eigenvalues {
        if vertices.vertices().iter().any(|x| (x - l).norm() <= VERTEX_TOL) {
            continue;
        }
        r = r.max(containing_radius(vertices, l, floor)?);
    }
    is_e_large_enough(vertices, r).then_some(r)
}

/// Ritt_E classification by a type bisection followed by a mesh-refinement
/// plateau test on the resolvent-product constant.
pub fn classify_ritt(op: &FiniteOperator, vertices: &UnimodularVertexSet) -> RittClassification {
    let not_ritt = |samples| RittClassification {
        is_ritt: false,
        type_estimate: 1.0,
        constant: f64::INFINITY,
        samples_used: samples,
    };
    let r = match spectral_type(&op.eigenvalues(), vertices) {
        Some(r) => r,
        None => return not_ritt(0),
    };
    let s = 0.5 * (r + 1.0);
    let mesh = RittMesh {
        min_distance: 1e-5,
        ..RittMesh::default()
    };
    let deep = || {
        let domain = StolzDomain::new(vertices.clone(), s)?;
        sup_over(op, vertices, &domain, &mesh.inner_points(&domain, 1e-10))
    };
    match (ritt_constant(op, vertices, s, &mesh), deep()) {
        (Ok(a), Ok(b)) => {
            let samples = a.samples + b.samples;
            if b.value.is_finite() && b.value <= a.value * (1.0 + PLATEAU_TOL) {
                RittClassification {
                    is_ritt: true,
                    type_estimate: r,
                    constant: a.value.max(b.value),
                    samples_used: samples,
                }
            } else {
                not_ritt(samples)
            }
        }
        _ => not_ritt(0),
    }
}

/// `max n^α ‖(ρT)^{n-1} Π(I - conj(ξ_j) ρT)^α‖` over `n ≤ n_max` and the
/// given `ρ`.
pub fn power_family_bound(
    op: &FiniteOperator,
    vertices: &UnimodularVertexSet,
    alpha: f64,
    rho_grid: &[f64],
    n_max: usize,
) -> Result<PowerFamilyBound> {
    let per_rho: Vec<Result<PowerFamilyBound>> = rho_grid
        .par_iter()
        .map(|&rho| {
            if !(rho > 0.0 && rho <= 1.0) {
                return Err(Error::Domain {
                    name: "rho",
                    value: rho,
                    expected: "0 < rho <= 1",
                });
            }
            let scaled = op.scaled(rho);
            let factor = fractional_factor_with(&scaled.spectrum(), vertices, alpha)?;
            Ok(power_family_scan(&scaled, &factor, alpha, n_max, rho))
        })
        .collect();
    let mut best = PowerFamilyBound {
        value: 0.0,
        argmax_n: 1,
        argmax_rho: rho_grid.first().copied().unwrap_or(1.0),
    };
    for b in per_rho {
        let b = b?;
        if b.value > best.value {
            best = b;
        }
    }
    Ok(best)
}

fn power_family_scan(
    op: &FiniteOperator,
    factor: &CMat,
    alpha: f64,
    n_max: usize,
    rho: f64,
) -> PowerFamilyBound {
    let mut term = factor.clone();
    let mut best = PowerFamilyBound {
        value: 0.0,
        argmax_n: 1,
        argmax_rho: rho,
    };
    for n in 1..=n_max.max(1) {
        if n > 1 {
            term = op.entries() * &term;
        }
        let value = (n as f64).powf(alpha) * op.norm_of(&term);
        if value > best.value {
            best.value = value;
            best.argmax_n = n;
        }
        if linalg::frobenius(&term) == 0.0 {
            break;
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn zero_operator_constant_matches_scalar_oracle() {
        let e = UnimodularVertexSet::roots_of_unity(1);
        let t = FiniteOperator::zero(2, 2.0);
        let mesh = RittMesh::default();
        let got = ritt_constant(&t, &e, 0.5, &mesh).unwrap();
        let domain = StolzDomain::new(e.clone(), 0.5).unwrap();
        let oracle = mesh
            .points(&domain)
            .iter()
            .map(|z| (1.0 - z).norm() / z.norm())
            .fold(0.0, f64::max);
        assert_abs_diff_eq!(got.value, oracle, epsilon = 1e-12);
        assert!(got.value.is_finite());
        let min_modulus = mesh.points(&domain).iter().map(|z| z.norm()).fold(f64::INFINITY, f64::min);
        assert!(got.value <= 3.0 / min_modulus);
    }

    #[test]
    fn near_vertex_eigenvalue_gives_finite_constant() {
        let xi = C64::from_polar(1.0, 0.7);
        let e = UnimodularVertexSet::new(vec![xi]).unwrap();
        let t = FiniteOperator::diagonal(&[xi * 0.9], 2.0).unwrap();
        let mesh = RittMesh::default();
        let got = ritt_constant(&t, &e, 0.95, &mesh).unwrap();
        let domain = StolzDomain::new(e.clone(), 0.95).unwrap();
        let oracle = mesh
            .points(&domain)
            .iter()
            .map(|&z| (1.0 - xi.conj() * z).norm() / (z - xi * 0.9).norm())
            .fold(0.0, f64::max);
        assert_abs_diff_eq!(got.value, oracle, epsilon = 1e-9 * oracle);
    }

    #[test]
    fn spectrum_outside_is_an_error() {
        let e = UnimodularVertexSet::roots_of_unity(1);
        let t = FiniteOperator::diagonal(&[c(1.05, 0.0)], 2.0).unwrap();
        assert!(matches!(
            ritt_constant(&t, &e, 0.5, &RittMesh::default()),
            Err(Error::SpectrumOutside { .. })
        ));
    }

    #[test]
    fn classification_examples() {
        let e = UnimodularVertexSet::roots_of_unity(1);
        let zero = classify_ritt(&FiniteOperator::zero(2, 2.0), &e);
        assert!(zero.is_ritt);
        assert!(zero.type_estimate <= 0.1);

        let vertex = classify_ritt(&FiniteOperator::diagonal(&[c(1.0, 0.0)], 2.0).unwrap(), &e);
        assert!(vertex.is_ritt);
        assert_abs_diff_eq!(vertex.constant, 1.0, epsilon = 1e-9);

        let off = classify_ritt(&FiniteOperator::diagonal(&[c(0.0, 1.0)], 2.0).unwrap(), &e);
        assert!(!off.is_ritt);

        // a Jordan block at the vertex is power bounded in no Ritt sense
        let jordan = crate::linalg::from_real_rows(&[&[1.0, 1.0], &[0.0, 1.0]]);
        let j = classify_ritt(&FiniteOperator::hilbert(jordan).unwrap(), &e);
        assert!(!j.is_ritt);
    }

    #[test]
    fn normal_operator_type_is_recovered() {
        let e = UnimodularVertexSet::roots_of_unity(2);
        // 0.6 e^{i·1.2} sits on the arc of ∂E_0.6
        let t = FiniteOperator::diagonal(&[C64::from_polar(0.6, 1.2), c(0.9, 0.0), c(-0.2, 0.1)], 2.0)
            .unwrap();
        let cls = classify_ritt(&t, &e);
        assert!(cls.is_ritt);
        assert!(cls.type_estimate <= 0.65);
        assert!(cls.type_estimate >= 0.59);
    }

    #[test]
    fn power_family_examples() {
        let e = UnimodularVertexSet::roots_of_unity(1);
        let zero = FiniteOperator::zero(2, 2.0);
        let b = power_family_bound(&zero, &e, 1.5, &[1.0], 50).unwrap();
        assert_abs_diff_eq!(b.value, 1.0, epsilon = 1e-14);
        assert_eq!(b.argmax_n, 1);

        let half = FiniteOperator::diagonal(&[c(0.5, 0.0)], 2.0).unwrap();
        let b = power_family_bound(&half, &e, 1.0, &[1.0], 100).unwrap();
        let oracle = (1..=100)
            .map(|n| n as f64 * 0.5f64.powi(n as i32 - 1) * 0.5)
            .fold(0.0, f64::max);
        assert_abs_diff_eq!(b.value, oracle, epsilon = 1e-14);
        // n 0.5^{n-1} 0.5 peaks at n = 1, 2 with value 0.5
        assert_abs_diff_eq!(b.value, 0.5, epsilon = 1e-14);
    }

    #[test]
    fn power_family_plateau_for_interior_spectrum() {
        let e = UnimodularVertexSet::roots_of_unity(2);
        let t = FiniteOperator::diagonal(&[c(0.9, 0.02), c(-0.7, 0.1), c(0.2, 0.3)], 2.0).unwrap();
        let short = power_family_bound(&t, &e, 1.0, &[0.9, 1.0], 1_000).unwrap();
        let long = power_family_bound(&t, &e, 1.0, &[0.9, 1.0], 10_000).unwrap();
        assert!(long.value <= short.value * 1.01);
    }
}
