//! Unimodular vertex sets, generalized Stolz domains `E_r` and their
//! oriented boundary paths.
//!
//! `E_r` is the interior of the convex hull of the disc `D(0, r)` and a
//! finite set `E` of points on the unit circle. When every chord between
//! consecutive vertices meets the closed disc (`r` is *E-large enough*) the
//! boundary consists of one tangent segment on each side of every vertex,
//! joined by arcs of the circle of radius `r`.

use std::f64::consts::TAU;

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const UNIMODULAR_TOL: f64 = 1e-12;
const CHAIN_TOL: f64 = 1e-10;
/// Points closer than this to the boundary are reported as outside.
const OPEN_MARGIN: f64 = 1e-12;

/// Vertices `xi_1, ..., xi_N` on the unit circle in counterclockwise order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<[f64; 2]>", into = "Vec<[f64; 2]>")]
pub struct UnimodularVertexSet {
    vertices: Vec<C64>,
}

impl UnimodularVertexSet {
    pub fn new(vertices: Vec<C64>) -> Result<Self> {
        if vertices.is_empty() {
            return Err(Error::EmptyVertexSet);
        }
        for (index, v) in vertices.iter().enumerate() {
            let modulus = v.norm();
            if (modulus - 1.0).abs() > UNIMODULAR_TOL {
                return Err(Error::NotUnimodular { index, modulus });
            }
        }
        for i in 0..vertices.len() {
            for j in i + 1..vertices.len() {
                if (vertices[i] - vertices[j]).norm() < 1e-12 {
                    return Err(Error::DuplicateVertex {
                        first: i,
                        second: j,
                    });
                }
            }
        }
        // Angles measured from the first vertex must increase within one turn.
        let base = vertices[0].arg();
        let mut previous = 0.0;
        for (index, v) in vertices.iter().enumerate().skip(1) {
            let a = (v.arg() - base).rem_euclid(TAU);
            if a <= previous {
                return Err(Error::NotCounterclockwise { index });
            }
            previous = a;
        }
        Ok(Self { vertices })
    }

    /// Builds the set from polar angles (radians).
    pub fn from_angles(angles: &[f64]) -> Result<Self> {
        Self::new(angles.iter().map(|&a| C64::from_polar(1.0, a)).collect())
    }

    /// The `N`-th roots of unity, starting at 1.
    pub fn roots_of_unity(n: usize) -> Self {
        let angles: Vec<f64> = (0..n).map(|k| TAU * k as f64 / n as f64).collect();
        let mut set = Self::from_angles(&angles).expect("roots of unity are a valid vertex set");
        // ±1 and ±i exactly, so parity and symmetry identities hold bitwise
        for v in &mut set.vertices {
            for c in [&mut v.re, &mut v.im] {
                if c.abs() < 1e-15 {
                    *c = 0.0;
                } else if (c.abs() - 1.0).abs() < 1e-15 {
                    *c = c.signum();
                }
            }
        }
        set
    }

    pub fn vertices(&self) -> &[C64] {
        &self.vertices
    }

    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    /// Vertex `j` with cyclic indexing.
    pub fn vertex(&self, j: usize) -> C64 {
        self.vertices[j % self.vertices.len()]
    }

    /// Counterclockwise angular gap from vertex `j` to vertex `j + 1`.
    /// A single vertex has a full-turn gap.
    pub fn gap(&self, j: usize) -> f64 {
        let n = self.vertices.len();
        if n == 1 {
            return TAU;
        }
        let a = self.vertex(j).arg();
        let b = self.vertex(j + 1).arg();
        let g = (b - a).rem_euclid(TAU);
        if g == 0.0 {
            TAU
        } else {
            g
        }
    }

    /// The conjugate set `{conj(xi_j)}`, reordered counterclockwise.
    pub fn conjugate(&self) -> Self {
        let mut v: Vec<C64> = self.vertices.iter().map(|x| x.conj()).collect();
        v.reverse();
        Self::new(v).expect("conjugation preserves validity")
    }

    pub fn rotated(&self, u: C64) -> Self {
        let u = u / u.norm();
        Self::new(self.vertices.iter().map(|x| x * u).collect())
            .expect("rotation preserves validity")
    }

    /// `prod_j (1 - conj(xi_j) z)`.
    pub fn vertex_product(&self, z: C64) -> C64 {
        self.vertices
            .iter()
            .fold(C64::new(1.0, 0.0), |acc, x| acc * (1.0 - x.conj() * z))
    }

    /// Smallest radius that is E-large enough (0 for a single vertex).
    pub fn min_large_enough_radius(&self) -> f64 {
        if self.len() == 1 {
            return 0.0;
        }
        (0..self.len())
            .map(|j| chord_distance(self.vertex(j), self.vertex(j + 1)))
            .fold(0.0, f64::max)
    }
}

impl TryFrom<Vec<[f64; 2]>> for UnimodularVertexSet {
    type Error = Error;
    fn try_from(v: Vec<[f64; 2]>) -> Result<Self> {
        Self::new(v.into_iter().map(|[re, im]| C64::new(re, im)).collect())
    }
}

impl From<UnimodularVertexSet> for Vec<[f64; 2]> {
    fn from(v: UnimodularVertexSet) -> Self {
        v.vertices.iter().map(|z| [z.re, z.im]).collect()
    }
}

fn chord_distance(a: C64, b: C64) -> f64 {
    point_segment_distance(C64::new(0.0, 0.0), a, b)
}

/// Euclidean distance from `p` to the segment `[a, b]`.
pub fn point_segment_distance(p: C64, a: C64, b: C64) -> f64 {
    let d = b - a;
    let len2 = d.norm_sqr();
    if len2 == 0.0 {
        return (p - a).norm();
    }
    let t = ((p - a) * d.conj()).re / len2;
    let t = t.clamp(0.0, 1.0);
    (p - (a + d * t)).norm()
}

/// True iff every chord `[xi_j, xi_{j+1}]` meets the closed disc of radius `r`.
pub fn is_e_large_enough(vertices: &UnimodularVertexSet, r: f64) -> bool {
    if vertices.len() == 1 {
        return true;
    }
    (0..vertices.len())
        .all(|j| chord_distance(vertices.vertex(j), vertices.vertex(j + 1)) <= r + 1e-12)
}

/// Returns `(s e^{i theta} xi, s e^{-i theta} xi)` with `theta = arccos(s)`:
/// the points where the two lines through `xi` touch the circle of radius `s`.
pub fn tangent_points(xi: C64, s: f64) -> Result<(C64, C64)> {
    if !(s > 0.0 && s < 1.0) {
        return Err(Error::Domain {
            name: "s",
            value: s,
            expected: "0 < s < 1",
        });
    }
    let theta = s.acos();
    Ok((
        xi * C64::from_polar(s, theta),
        xi * C64::from_polar(s, -theta),
    ))
}

/// The generalized Stolz domain `E_r`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StolzDomain {
    vertices: UnimodularVertexSet,
    radius: f64,
}

impl StolzDomain {
    pub fn new(vertices: UnimodularVertexSet, radius: f64) -> Result<Self> {
        if !(radius > 0.0 && radius < 1.0) {
            return Err(Error::Domain {
                name: "radius",
                value: radius,
                expected: "0 < r < 1",
            });
        }
        Ok(Self { vertices, radius })
    }

    pub fn vertices(&self) -> &UnimodularVertexSet {
        &self.vertices
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn is_e_large_enough(&self) -> bool {
        is_e_large_enough(&self.vertices, self.radius)
    }

    /// Same vertex set, different radius.
    pub fn with_radius(&self, radius: f64) -> Result<Self> {
        Self::new(self.vertices.clone(), radius)
    }

    pub fn rotated(&self, u: C64) -> Self {
        Self {
            vertices: self.vertices.rotated(u),
            radius: self.radius,
        }
    }

    /// Signed clearance of `z`: `min_u (h(u) - Re(z conj(u)))` over unit
    /// directions `u`, with `h` the support function of the hull. Positive
    /// inside (where it equals the distance to the boundary), zero on the
    /// boundary, negative outside.
    ///
    /// `h` is piecewise smooth in `u`; the minimum is attained at a critical
    /// point of one piece or at a breakpoint between two pieces, so the
    /// candidate set below is exhaustive.
    pub fn margin(&self, z: C64) -> f64 {
        let xs = self.vertices.vertices();
        let mut candidates = self.face_normals();
        candidates.push(if z.norm() > 0.0 { z / z.norm() } else { C64::new(1.0, 0.0) });
        for &x in xs {
            let d = x - z;
            if d.norm() > 0.0 {
                candidates.push(-d / d.norm());
                candidates.push(d / d.norm());
            }
        }
        candidates
            .into_iter()
            .map(|u| self.support(u) - (z * u.conj()).re)
            .fold(f64::INFINITY, f64::min)
    }

    fn support(&self, u: C64) -> f64 {
        self.vertices
            .vertices()
            .iter()
            .map(|x| (x * u.conj()).re)
            .fold(self.radius, f64::max)
    }

    /// Outer normals of the tangent lines and chords that can carry a face.
    fn face_normals(&self) -> Vec<C64> {
        let xs = self.vertices.vertices();
        let theta = self.radius.acos();
        let mut out = Vec::with_capacity(2 * xs.len() + xs.len().pow(2));
        for (j, &x) in xs.iter().enumerate() {
            out.push(x * C64::from_polar(1.0, theta));
            out.push(x * C64::from_polar(1.0, -theta));
            for &y in &xs[j + 1..] {
                let e = (x - y) * C64::i();
                let e = e / e.norm();
                out.push(e);
                out.push(-e);
            }
        }
        out
    }

    /// Membership in the open hull.
    pub fn contains(&self, z: C64) -> bool {
        self.margin(z) > OPEN_MARGIN
    }

    /// Membership in the closed hull up to `tol`.
    pub fn contains_closure(&self, z: C64, tol: f64) -> bool {
        self.margin(z) >= -tol
    }

    /// Index of a vertex within `tol` of `z`.
    pub fn vertex_near(&self, z: C64, tol: f64) -> Option<usize> {
        self.vertices
            .vertices()
            .iter()
            .position(|x| (x - z).norm() <= tol)
    }

    /// Closed counterclockwise boundary path of the domain.
    pub fn boundary_path(&self) -> Result<BoundaryPath> {
        BoundaryPath::new(self)
    }

    /// Radius along the ray `e^{i phi}` at which it leaves the closed hull:
    /// `min h(u) / Re(e^{i phi} conj(u))` over the normals that can carry
    /// the exit point (the ray direction itself for arc points).
    pub fn radial_boundary(&self, phi: f64) -> f64 {
        let dir = C64::from_polar(1.0, phi);
        let mut normals = self.face_normals();
        normals.push(dir);
        normals
            .into_iter()
            .filter_map(|u| {
                let c = (dir * u.conj()).re;
                (c > 1e-15).then(|| self.support(u) / c)
            })
            .fold(1.0, f64::min)
    }
}

/// One piece of a boundary path, oriented counterclockwise.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Piece {
    Segment { start: C64, end: C64 },
    /// Arc of the circle `|z| = radius` for angles `start_angle..end_angle`
    /// (`end_angle >= start_angle`).
    Arc {
        radius: f64,
        start_angle: f64,
        end_angle: f64,
    },
}

impl Piece {
    pub fn start(&self) -> C64 {
        match *self {
            Piece::Segment { start, .. } => start,
            Piece::Arc {
                radius,
                start_angle,
                ..
            } => C64::from_polar(radius, start_angle),
        }
    }

    pub fn end(&self) -> C64 {
        match *self {
            Piece::Segment { end, .. } => end,
            Piece::Arc {
                radius, end_angle, ..
            } => C64::from_polar(radius, end_angle),
        }
    }

    pub fn length(&self) -> f64 {
        match *self {
            Piece::Segment { start, end } => (end - start).norm(),
            Piece::Arc {
                radius,
                start_angle,
                end_angle,
            } => radius * (end_angle - start_angle),
        }
    }

    /// Point at parameter `t` in `[0, 1]`.
    pub fn point(&self, t: f64) -> C64 {
        match *self {
            Piece::Segment { start, end } => start + (end - start) * t,
            Piece::Arc {
                radius,
                start_angle,
                end_angle,
            } => C64::from_polar(radius, start_angle + (end_angle - start_angle) * t),
        }
    }

    /// Derivative `dz/dt` at parameter `t`.
    pub fn tangent(&self, t: f64) -> C64 {
        match *self {
            Piece::Segment { start, end } => end - start,
            Piece::Arc {
                radius,
                start_angle,
                end_angle,
            } => {
                let sweep = end_angle - start_angle;
                C64::i() * C64::from_polar(radius, start_angle + sweep * t) * sweep
            }
        }
    }
}

/// Closed counterclockwise boundary `∂E_s`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundaryPath {
    pieces: Vec<Piece>,
    /// For vertex `j`: (index of the incoming segment, index of the outgoing segment).
    vertex_touch_indices: Vec<(usize, usize)>,
    radius: f64,
}

impl BoundaryPath {
    fn new(domain: &StolzDomain) -> Result<Self> {
        let e = domain.vertices();
        let s = domain.radius();
        if !domain.is_e_large_enough() {
            let chord = (0..e.len())
                .find(|&j| chord_distance(e.vertex(j), e.vertex(j + 1)) > s + 1e-12)
                .unwrap_or(0);
            return Err(Error::UnsupportedGeometry { radius: s, chord });
        }
        let n = e.len();
        let theta = s.acos();
        let mut pieces = Vec::with_capacity(3 * n);
        let mut outgoing = vec![0usize; n];
        let mut incoming = vec![0usize; n];
        for k in 0..n {
            let xk = e.vertex(k);
            let (out_point, _) = tangent_points(xk, s)?;
            let (_, in_point) = tangent_points(e.vertex(k + 1), s)?;
            outgoing[k] = pieces.len();
            pieces.push(Piece::Segment {
                start: xk,
                end: out_point,
            });
            let start_angle = xk.arg() + theta;
            let end_angle = xk.arg() + e.gap(k) - theta;
            pieces.push(Piece::Arc {
                radius: s,
                start_angle,
                end_angle: end_angle.max(start_angle),
            });
            incoming[(k + 1) % n] = pieces.len();
            pieces.push(Piece::Segment {
                start: in_point,
                end: e.vertex(k + 1),
            });
        }
        let path = Self {
            pieces,
            vertex_touch_indices: (0..n).map(|j| (incoming[j], outgoing[j])).collect(),
            radius: s,
        };
        debug_assert!(path.closure_defect() < CHAIN_TOL);
        Ok(path)
    }

    pub fn pieces(&self) -> &[Piece] {
        &self.pieces
    }

    pub fn vertex_touch_indices(&self) -> &[(usize, usize)] {
        &self.vertex_touch_indices
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    /// Largest endpoint mismatch between consecutive pieces (cyclically).
    pub fn closure_defect(&self) -> f64 {
        let n = self.pieces.len();
        (0..n)
            .map(|i| (self.pieces[i].end() - self.pieces[(i + 1) % n].start()).norm())
            .fold(0.0, f64::max)
    }

    pub fn length(&self) -> f64 {
        self.pieces.iter().map(Piece::length).sum()
    }

    /// Signed enclosed area via the exact line integral `(1/2) Im ∮ conj(z) dz`.
    pub fn signed_area(&self) -> f64 {
        self.pieces
            .iter()
            .map(|p| match *p {
                Piece::Segment { start, end } => 0.5 * (start.conj() * end).im,
                Piece::Arc {
                    radius,
                    start_angle,
                    end_angle,
                } => 0.5 * radius * radius * (end_angle - start_angle),
            })
            .sum()
    }

    /// Total turning of the tangent direction (2π for a convex closed path).
    pub fn total_turning(&self) -> f64 {
        let mut total = 0.0;
        let n = self.pieces.len();
        for i in 0..n {
            let p = &self.pieces[i];
            if let Piece::Arc {
                start_angle,
                end_angle,
                ..
            } = *p
            {
                total += end_angle - start_angle;
            }
            let out_dir = p.tangent(1.0);
            let next = &self.pieces[(i + 1) % n];
            let in_dir = next.tangent(0.0);
            if out_dir.norm() > 0.0 && in_dir.norm() > 0.0 {
                total += (in_dir / out_dir).arg();
            }
        }
        total
    }

    /// `count` points per piece, for plotting.
    pub fn sample(&self, count: usize) -> Vec<C64> {
        let count = count.max(2);
        self.pieces
            .iter()
            .flat_map(|p| (0..count).map(move |i| p.point(i as f64 / (count - 1) as f64)))
            .collect()
    }

    /// CSV with columns `piece,re,im`.
    pub fn to_csv(&self, count: usize) -> String {
        let count = count.max(2);
        let mut out = String::from("piece,re,im\n");
        for (idx, p) in self.pieces.iter().enumerate() {
            for i in 0..count {
                let z = p.point(i as f64 / (count - 1) as f64);
                out.push_str(&format!("{idx},{:.17e},{:.17e}\n", z.re, z.im));
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;
    use approx::assert_abs_diff_eq;

    fn single() -> UnimodularVertexSet {
        UnimodularVertexSet::roots_of_unity(1)
    }

    #[test]
    fn rejects_bad_vertex_sets() {
        assert!(matches!(
            UnimodularVertexSet::new(vec![C64::new(1.01, 0.0)]),
            Err(Error::NotUnimodular { index: 0, .. })
        ));
        assert!(matches!(
            UnimodularVertexSet::new(vec![C64::new(1.0, 0.0), C64::new(1.0, 0.0)]),
            Err(Error::DuplicateVertex { .. })
        ));
        assert!(matches!(
            UnimodularVertexSet::from_angles(&[0.0, 2.0, 1.0]),
            Err(Error::NotCounterclockwise { index: 2 })
        ));
        assert!(UnimodularVertexSet::new(vec![]).is_err());
    }

    #[test]
    fn e_large_enough_examples() {
        assert!(is_e_large_enough(&single(), 0.3));
        assert!(is_e_large_enough(&UnimodularVertexSet::roots_of_unity(2), 0.1));
        let e = UnimodularVertexSet::from_angles(&[0.0, PI / 3.0]).unwrap();
        // distance from 0 to the chord is cos(π/6)
        assert_abs_diff_eq!(
            point_segment_distance(C64::new(0.0, 0.0), e.vertex(0), e.vertex(1)),
            (PI / 6.0).cos(),
            epsilon = 1e-15
        );
        assert!(!is_e_large_enough(&e, 0.5));
        assert!(is_e_large_enough(&e, 0.87));
    }

    #[test]
    fn tangent_point_examples() {
        let (a, b) = tangent_points(C64::new(1.0, 0.0), 0.5).unwrap();
        assert_abs_diff_eq!(a.re, 0.25, epsilon = 1e-12);
        assert_abs_diff_eq!(a.im, 0.4330127018922193, epsilon = 1e-12);
        assert_abs_diff_eq!(b.im, -0.4330127018922193, epsilon = 1e-12);
        let (a, b) = tangent_points(C64::i(), 0.5).unwrap();
        assert_abs_diff_eq!((a - C64::new(-0.4330127018922193, 0.25)).norm(), 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!((b - C64::new(0.4330127018922193, 0.25)).norm(), 0.0, epsilon = 1e-12);
        let (a, _) = tangent_points(C64::new(1.0, 0.0), 0.8).unwrap();
        assert_abs_diff_eq!(a.norm(), 0.8, epsilon = 1e-14);
        assert_abs_diff_eq!(a.arg(), 0.8f64.acos(), epsilon = 1e-14);
        // the segment [1, a] is tangent: radius ⟂ segment
        assert_abs_diff_eq!((a * (C64::new(1.0, 0.0) - a).conj()).re, 0.0, epsilon = 1e-14);
        assert!(tangent_points(C64::new(1.0, 0.0), 1.0).is_err());
        assert!(tangent_points(C64::new(1.0, 0.0), 0.0).is_err());
    }

    #[test]
    fn contains_examples() {
        let d = StolzDomain::new(single(), 0.5).unwrap();
        assert!(d.contains(C64::new(0.0, 0.0)));
        assert!(!d.contains(C64::new(1.01, 0.0)));
        assert!(!d.contains(C64::new(0.0, 0.9)));
        // interior margin is the distance to the boundary
        assert_abs_diff_eq!(d.margin(C64::new(0.0, 0.0)), 0.5, epsilon = 1e-14);
        assert!(d.contains(C64::new(0.9, 0.0)));
        assert!(d.contains_closure(C64::new(1.0, 0.0), 1e-12));
    }

    #[test]
    fn boundary_path_single_vertex() {
        let d = StolzDomain::new(single(), 0.5).unwrap();
        let path = d.boundary_path().unwrap();
        assert_eq!(path.pieces().len(), 3);
        match path.pieces()[1] {
            Piece::Arc {
                start_angle,
                end_angle,
                ..
            } => assert_abs_diff_eq!(end_angle - start_angle, TAU - TAU / 3.0, epsilon = 1e-12),
            _ => panic!("expected an arc"),
        }
        assert!(path.closure_defect() < 1e-10);
        assert_abs_diff_eq!(path.total_turning(), TAU, epsilon = 1e-10);
        assert!(path.signed_area() > 0.0);
    }

    #[test]
    fn boundary_path_two_vertices() {
        let d = StolzDomain::new(UnimodularVertexSet::roots_of_unity(2), 0.5).unwrap();
        let path = d.boundary_path().unwrap();
        let segments = path
            .pieces()
            .iter()
            .filter(|p| matches!(p, Piece::Segment { .. }))
            .count();
        assert_eq!(segments, 4);
        assert_eq!(path.pieces().len() - segments, 2);
        assert!(path.closure_defect() < 1e-10);
        assert!(path.signed_area() > 0.0);
        for (j, &(inc, out)) in path.vertex_touch_indices().iter().enumerate() {
            let xi = d.vertices().vertex(j);
            assert!((path.pieces()[inc].end() - xi).norm() < 1e-14);
            assert!((path.pieces()[out].start() - xi).norm() < 1e-14);
        }
    }

    #[test]
    fn boundary_requires_large_enough_radius() {
        let e = UnimodularVertexSet::from_angles(&[0.0, PI / 3.0]).unwrap();
        let d = StolzDomain::new(e, 0.5).unwrap();
        assert!(matches!(
            d.boundary_path(),
            Err(Error::UnsupportedGeometry { .. })
        ));
    }

    #[test]
    fn radial_boundary_matches_disc_away_from_vertices() {
        let d = StolzDomain::new(single(), 0.5).unwrap();
        assert_abs_diff_eq!(d.radial_boundary(PI), 0.5, epsilon = 1e-12);
        assert_abs_diff_eq!(d.radial_boundary(0.0), 1.0, epsilon = 1e-12);
    }
}
