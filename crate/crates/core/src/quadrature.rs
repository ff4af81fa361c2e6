//! Gauss–Legendre rules and graded contour quadrature on boundary paths.

use std::f64::consts::PI;

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{BoundaryPath, Piece};

/// Gauss–Legendre nodes and weights on `[-1, 1]`, by Newton iteration on
/// the Legendre recurrence.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1, "Gauss–Legendre order must be positive");
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let m = n.div_ceil(2);
    for i in 0..m {
        let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre_with_derivative(n, x);
        if d != 0.0 {
            dp = d;
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    (nodes, weights)
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Nodes and weights of `t -> (a+b)/2 + (b-a)/2 x` on `[a, b]`.
pub fn gauss_legendre_interval(n: usize, a: f64, b: f64) -> Vec<(f64, f64)> {
    let (x, w) = gauss_legendre(n);
    let half = 0.5 * (b - a);
    let mid = 0.5 * (a + b);
    x.iter()
        .zip(&w)
        .map(|(&xi, &wi)| (mid + half * xi, half * wi))
        .collect()
}

/// A node of a contour rule: `∮ f(z) dz ≈ Σ weight · f(point)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadNode {
    pub point: C64,
    pub weight: C64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadratureSpec {
    /// Geometric ratio of successive panels toward each vertex.
    pub grading: f64,
    /// Number of geometric levels toward each vertex.
    pub depth: usize,
    /// Gauss–Legendre order per panel.
    pub order: usize,
    /// Upper bound on panel length (arcs and the outer part of segments).
    pub max_panel: f64,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        Self {
            grading: 0.5,
            depth: 40,
            order: 32,
            max_panel: 0.05,
        }
    }
}

/// Contour rule on a closed boundary path.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GradedQuadrature {
    nodes: Vec<QuadNode>,
    spec: QuadratureSpec,
    /// Radius of the domain whose boundary was discretized.
    radius: f64,
}

impl GradedQuadrature {
    pub fn nodes(&self) -> &[QuadNode] {
        &self.nodes
    }

    pub fn spec(&self) -> QuadratureSpec {
        self.spec
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn integrate<F: Fn(C64) -> C64>(&self, f: F) -> C64 {
        self.nodes
            .iter()
            .fold(C64::new(0.0, 0.0), |acc, n| acc + n.weight * f(n.point))
    }
}

/// Builds the graded rule. Every segment of the path touches a vertex at
/// one end; it is split geometrically toward that vertex with ratio
/// `grading` over `depth` levels, the last level absorbing the remainder.
pub fn quadrature_nodes(path: &BoundaryPath, spec: QuadratureSpec) -> Result<GradedQuadrature> {
    if !(spec.grading > 0.0 && spec.grading < 1.0) {
        return Err(Error::Domain {
            name: "grading",
            value: spec.grading,
            expected: "0 < grading < 1",
        });
    }
    if spec.depth < 1 {
        return Err(Error::Domain {
            name: "depth",
            value: spec.depth as f64,
            expected: "depth >= 1",
        });
    }
    if spec.order < 2 {
        return Err(Error::Domain {
            name: "order",
            value: spec.order as f64,
            expected: "order >= 2",
        });
    }
    if !(spec.max_panel > 0.0) {
        return Err(Error::Domain {
            name: "max_panel",
            value: spec.max_panel,
            expected: "max_panel > 0",
        });
    }
    let rule = gauss_legendre_interval(spec.order, 0.0, 1.0);
    let mut nodes = Vec::new();
    let push_panel = |piece: &Piece, a: f64, b: f64, nodes: &mut Vec<QuadNode>| {
        let len = piece.length() * (b - a);
        let parts = ((len / spec.max_panel).ceil() as usize).max(1);
        for q in 0..parts {
            let pa = a + (b - a) * q as f64 / parts as f64;
            let pb = a + (b - a) * (q + 1) as f64 / parts as f64;
            for &(x, w) in &rule {
                let t = pa + (pb - pa) * x;
                nodes.push(QuadNode {
                    point: piece.point(t),
                    weight: piece.tangent(t) * (w * (pb - pa)),
                });
            }
        }
    };
    let touch = path.vertex_touch_indices();
    for (idx, piece) in path.pieces().iter().enumerate() {
        match piece {
            Piece::Arc { .. } => push_panel(piece, 0.0, 1.0, &mut nodes),
            Piece::Segment { .. } => {
                // outgoing segments start at their vertex, incoming ones end there
                let starts_at_vertex = touch.iter().any(|&(_, out)| out == idx);
                let breaks = graded_breaks(spec.grading, spec.depth);
                for w in breaks.windows(2) {
                    let (near, far) = (w[1], w[0]);
                    if starts_at_vertex {
                        push_panel(piece, near, far, &mut nodes);
                    } else {
                        push_panel(piece, 1.0 - far, 1.0 - near, &mut nodes);
                    }
                }
            }
        }
    }
    Ok(GradedQuadrature {
        nodes,
        spec,
        radius: path.radius(),
    })
}

/// Break points `1, g, g², …, g^depth, 0` measured as distance fraction
/// from the vertex.
fn graded_breaks(grading: f64, depth: usize) -> Vec<f64> {
    let mut b: Vec<f64> = (0..=depth).map(|i| grading.powi(i as i32)).collect();
    b.push(0.0);
    b
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{StolzDomain, UnimodularVertexSet};
    use approx::assert_abs_diff_eq;

    #[test]
    fn gauss_legendre_integrates_polynomials_exactly() {
        for n in [2usize, 5, 16, 33] {
            let (x, w) = gauss_legendre(n);
            assert_abs_diff_eq!(w.iter().sum::<f64>(), 2.0, epsilon = 1e-13);
            for deg in 0..2 * n {
                let exact = if deg % 2 == 1 {
                    0.0
                } else {
                    2.0 / (deg as f64 + 1.0)
                };
                let q: f64 = x.iter().zip(&w).map(|(xi, wi)| wi * xi.powi(deg as i32)).sum();
                assert_abs_diff_eq!(q, exact, epsilon = 1e-12);
            }
        }
    }

    fn rule(e: UnimodularVertexSet, s: f64) -> GradedQuadrature {
        let path = StolzDomain::new(e, s).unwrap().boundary_path().unwrap();
        quadrature_nodes(&path, QuadratureSpec::default()).unwrap()
    }

    #[test]
    fn closed_contour_annihilates_constants() {
        for n in 1..=3 {
            let q = rule(UnimodularVertexSet::roots_of_unity(n), 0.6);
            let total = q.integrate(|_| C64::new(1.0, 0.0));
            assert!(total.norm() < 1e-10, "{total}");
        }
    }

    #[test]
    fn cauchy_examples() {
        let q = rule(UnimodularVertexSet::roots_of_unity(1), 0.5);
        let inside = q.integrate(|z| 1.0 / z);
        assert_abs_diff_eq!((inside - C64::new(0.0, 2.0 * PI)).norm(), 0.0, epsilon = 1e-8);
        let outside = q.integrate(|z| 1.0 / (z - 2.0));
        assert!(outside.norm() < 1e-8);
    }

    #[test]
    fn node_count_bound() {
        let spec = QuadratureSpec {
            max_panel: 10.0,
            ..QuadratureSpec::default()
        };
        let e = UnimodularVertexSet::roots_of_unity(3);
        let path = StolzDomain::new(e, 0.6).unwrap().boundary_path().unwrap();
        let q = quadrature_nodes(&path, spec).unwrap();
        let bound = spec.order * (path.pieces().len() + 2 * 3 * spec.depth);
        assert!(q.len() <= bound);
    }

    #[test]
    fn rejects_bad_parameters() {
        let path = StolzDomain::new(UnimodularVertexSet::roots_of_unity(1), 0.5)
            .unwrap()
            .boundary_path()
            .unwrap();
        let bad = QuadratureSpec {
            grading: 1.0,
            ..QuadratureSpec::default()
        };
        assert!(quadrature_nodes(&path, bad).is_err());
        let bad = QuadratureSpec {
            order: 1,
            ..QuadratureSpec::default()
        };
        assert!(quadrature_nodes(&path, bad).is_err());
    }
}
