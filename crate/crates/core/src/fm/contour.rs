use std::f64::consts::TAU;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{StolzDomain, UnimodularVertexSet};
use crate::quadrature::gauss_legendre_interval;
use crate::C64;

/// Index of a contour piece: `m = 1` outgoing vertex segments, `m = 2`
/// incoming vertex segments, `m = 0` the polyline between them.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct PieceIndex {
    pub m: u8,
    pub j: usize,
    pub k: usize,
}

impl PieceIndex {
    pub fn new(m: u8, j: usize, k: usize) -> Self {
        Self { m, j, k }
    }
}

/// A subsegment `γ_{m,j,k}` with its disc `D_{m,j,k}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Subsegment {
    pub index: PieceIndex,
    /// Endpoints in the orientation of the contour.
    pub start: C64,
    pub end: C64,
    pub center: C64,
    pub disc_radius: f64,
    /// Vertex the piece accumulates at (`m ∈ {1, 2}`).
    pub anchor: Option<usize>,
}

impl Subsegment {
    pub fn length(&self) -> f64 {
        (self.end - self.start).norm()
    }

    /// `u ∈ [-1, 1]` mapped linearly onto the oriented segment.
    pub fn point(&self, u: f64) -> C64 {
        self.center + (self.end - self.start) * (0.5 * u)
    }
}

/// Construction parameters; `None` selects the derived default.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FmParams {
    pub r_prime: Option<f64>,
    pub theta0: Option<f64>,
    pub delta: Option<f64>,
    pub rho: Option<f64>,
    pub k_max: usize,
    pub p_max: usize,
}

impl Default for FmParams {
    fn default() -> Self {
        Self {
            r_prime: None,
            theta0: None,
            delta: None,
            rho: None,
            k_max: 40,
            p_max: 20,
        }
    }
}

pub const DEFAULT_RHO: f64 = 1.3;

/// Slack of every clearance the builder verifies (positive means satisfied).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClearanceReport {
    /// `min (dist(center, ∂E_r) - radius)` over the vertex discs.
    pub disc_inner: f64,
    /// Same against `∂E_s`; reported, not required.
    pub disc_outer: f64,
    /// `min dist(γ_0, ∂E_r) - δ`.
    pub polyline_inner: f64,
    /// `min dist(γ_0, ∂E_s) - δ`.
    pub polyline_outer: f64,
    /// `min` over the vertex segments of the distance to `∂E_r` relative to
    /// the distance to the vertex.
    pub segment_inner: f64,
    pub segment_outer: f64,
    pub max_polyline_length: f64,
    /// Distance from each vertex left uncovered by the stored subsegments.
    pub coverage_gap: f64,
    pub winding_number: f64,
    /// Name of the required clearance with the smallest slack.
    pub binding: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FMContour {
    vertices: UnimodularVertexSet,
    r: f64,
    s: f64,
    r_prime: f64,
    theta0: f64,
    delta: f64,
    rho: f64,
    l: f64,
    k_max: usize,
    p_max: usize,
    /// `Γ_{1,j}` as `(ξ_j, r' e^{iθ₀} ξ_j)`.
    outgoing: Vec<(C64, C64)>,
    /// `Γ_{2,j}` as `(r' e^{-iθ₀} ξ_{j+1}, ξ_{j+1})`.
    incoming: Vec<(C64, C64)>,
    /// Vertices of the polyline `Γ_{0,j}`.
    polylines: Vec<Vec<C64>>,
    subsegments: Vec<Subsegment>,
    clearance: ClearanceReport,
}

fn oriented_angle(from: C64, to: C64) -> f64 {
    (to / from).arg()
}

/// `∫ |dz| / |a - z|` over the segment `[start, end]`.
pub fn weight_mass(anchor: C64, start: C64, end: C64, order: usize) -> f64 {
    let d = end - start;
    gauss_legendre_interval(order, 0.0, 1.0)
        .into_iter()
        .map(|(t, w)| w * d.norm() / (anchor - (start + d * t)).norm())
        .sum()
}

impl FMContour {
    /// Builds `Γ` and verifies every clearance. Parameters left at `None` are
    /// derived from the geometry; an explicit parameter that violates a
    /// clearance is an error naming it.
    pub fn build(vertices: &UnimodularVertexSet, r: f64, s: f64, params: &FmParams) -> Result<Self> {
        let inner = StolzDomain::new(vertices.clone(), r)?;
        let outer = StolzDomain::new(vertices.clone(), s)?;
        if !inner.is_e_large_enough() {
            return Err(Error::FmConstruction(format!("r = {r} is not E-large enough")));
        }
        if !(r < s) {
            return Err(Error::FmConstruction(format!("need r < s, got r = {r}, s = {s}")));
        }
        if params.k_max == 0 || params.p_max > 30 {
            return Err(Error::FmConstruction("need k_max ≥ 1 and p_max ≤ 30".into()));
        }
        let x0 = vertices.vertex(0);
        let radial = |d: &StolzDomain, theta: f64| d.radial_boundary(x0.arg() + theta);

        let mut theta0 = match params.theta0 {
            Some(t) => t,
            None => 0.5 * s.acos(),
        };
        if params.theta0.is_none() {
            while radial(&inner, theta0) >= s.min(radial(&outer, theta0)) && theta0 > 1e-6 {
                theta0 *= 0.5;
            }
        }
        let max_theta = (0..vertices.len()).map(|j| vertices.gap(j)).fold(TAU, f64::min) / 2.0;
        if !(theta0 > 0.0 && theta0 < max_theta) {
            return Err(Error::FmConstruction(format!(
                "theta0 = {theta0} must lie in (0, {max_theta})"
            )));
        }
        let r_prime = match params.r_prime {
            Some(v) => v,
            None => 0.5 * (radial(&inner, theta0) + radial(&outer, theta0).min(s)),
        };
        if !(r < r_prime && r_prime < s) {
            return Err(Error::FmConstruction(format!("r' = {r_prime} must lie in (r, s)")));
        }

        let n = vertices.len();
        let xs = vertices.vertices();
        let out_end: Vec<C64> = xs.iter().map(|&x| x * C64::from_polar(r_prime, theta0)).collect();
        let in_start: Vec<C64> = (0..n)
            .map(|j| vertices.vertex(j + 1) * C64::from_polar(r_prime, -theta0))
            .collect();
        let outgoing: Vec<(C64, C64)> = (0..n).map(|j| (xs[j], out_end[j])).collect();
        let incoming: Vec<(C64, C64)> = (0..n).map(|j| (in_start[j], vertices.vertex(j + 1))).collect();
        let l = (out_end[0] - xs[0]).norm();

        // vertex segments must run strictly between the two boundaries
        let mut segment_inner = f64::INFINITY;
        let mut segment_outer = f64::INFINITY;
        let vertex_segments = outgoing.iter().map(|&(x, w)| (x, w)).chain(incoming.iter().map(|&(v, x)| (x, v)));
        for (x, w) in vertex_segments {
            for i in 1..=32 {
                let t = i as f64 / 32.0;
                let z = x + (w - x) * t;
                let dv = (w - x).norm() * t;
                segment_inner = segment_inner.min(-inner.margin(z) / dv);
                segment_outer = segment_outer.min(outer.margin(z) / dv);
            }
        }
        if !(segment_inner > 0.0) {
            return Err(Error::FmConstruction(format!(
                "vertex segments meet the closure of E_r (relative clearance {segment_inner:e})"
            )));
        }
        if !(segment_outer > 0.0) {
            return Err(Error::FmConstruction(format!(
                "vertex segments leave E_s (relative clearance {segment_outer:e})"
            )));
        }

        let endpoint_clearance = out_end
            .iter()
            .chain(&in_start)
            .map(|&z| (-inner.margin(z)).min(outer.margin(z)))
            .fold(f64::INFINITY, f64::min);
        let delta = params.delta.unwrap_or(0.5 * endpoint_clearance);
        if !(delta > 0.0) {
            return Err(Error::FmConstruction(format!("delta = {delta} must be positive")));
        }

        let polylines = (0..n)
            .map(|j| polyline(&inner, &outer, out_end[j], in_start[j], r_prime, delta))
            .collect::<Result<Vec<_>>>()?;

        let mut rho = params.rho.unwrap_or_else(|| default_rho(&inner, &outgoing[0]));
        if !(rho > 1.0) {
            return Err(Error::FmConstruction(format!("rho = {rho} must exceed 1")));
        }
        let mut attempt = 0;
        loop {
            let subsegments = subsegments(vertices, &outgoing, &incoming, &polylines, l, rho, delta, params.k_max);
            let clearance = clearance_report(
                &inner,
                &outer,
                &subsegments,
                &polylines,
                &outgoing,
                &incoming,
                delta,
                l,
                rho,
                params.k_max,
                segment_inner,
                segment_outer,
            );
            if clearance.disc_inner > 0.0 {
                let contour = Self {
                    vertices: vertices.clone(),
                    r,
                    s,
                    r_prime,
                    theta0,
                    delta,
                    rho,
                    l,
                    k_max: params.k_max,
                    p_max: params.p_max,
                    outgoing,
                    incoming,
                    polylines,
                    subsegments,
                    clearance,
                };
                return contour.validated();
            }
            if params.rho.is_some() || attempt >= 30 {
                return Err(Error::FmConstruction(format!(
                    "disc D_{{1,j,k}} meets ∂E_r for rho = {rho} (slack {:e})",
                    clearance.disc_inner
                )));
            }
            rho = 1.0 + 0.5 * (rho - 1.0);
            attempt += 1;
        }
    }

    fn validated(self) -> Result<Self> {
        let c = &self.clearance;
        let checks = [
            ("disc D_{m,j,k} against ∂E_r", c.disc_inner),
            ("polyline Γ_0 against ∂E_r", c.polyline_inner),
            ("polyline Γ_0 against ∂E_s", c.polyline_outer),
            ("polyline segment length ≤ δ/2", 0.5 * self.delta - c.max_polyline_length + 1e-15),
            ("winding number 1 around 0", 1e-6 - (c.winding_number - 1.0).abs()),
        ];
        for (name, slack) in checks {
            if !(slack > 0.0) {
                return Err(Error::FmConstruction(format!("{name} violated (slack {slack:e})")));
            }
        }
        Ok(self)
    }

    pub fn vertices(&self) -> &UnimodularVertexSet {
        &self.vertices
    }

    pub fn r(&self) -> f64 {
        self.r
    }

    pub fn s(&self) -> f64 {
        self.s
    }

    pub fn r_prime(&self) -> f64 {
        self.r_prime
    }

    pub fn theta0(&self) -> f64 {
        self.theta0
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn rho(&self) -> f64 {
        self.rho
    }

    /// Common length of the vertex segments.
    pub fn l(&self) -> f64 {
        self.l
    }

    pub fn k_max(&self) -> usize {
        self.k_max
    }

    pub fn p_max(&self) -> usize {
        self.p_max
    }

    pub fn clearance(&self) -> &ClearanceReport {
        &self.clearance
    }

    pub fn inner_domain(&self) -> StolzDomain {
        StolzDomain::new(self.vertices.clone(), self.r).expect("validated radius")
    }

    pub fn outer_domain(&self) -> StolzDomain {
        StolzDomain::new(self.vertices.clone(), self.s).expect("validated radius")
    }

    /// Piece list of `Γ_{m,j}` as oriented segments.
    pub fn segments(&self, m: u8, j: usize) -> Vec<(C64, C64)> {
        match m {
            1 => vec![self.outgoing[j]],
            2 => vec![self.incoming[j]],
            _ => self.polylines[j].windows(2).map(|w| (w[0], w[1])).collect(),
        }
    }

    pub fn subsegments(&self) -> &[Subsegment] {
        &self.subsegments
    }

    pub fn subsegment(&self, index: PieceIndex) -> Option<&Subsegment> {
        self.subsegments.iter().find(|s| s.index == index)
    }

    /// Number of polyline segments in `Γ_{0,j}`.
    pub fn polyline_len(&self, j: usize) -> usize {
        self.polylines[j].len() - 1
    }

    /// Vertex index that `Γ_{m,j}` accumulates at.
    pub fn anchor(&self, m: u8, j: usize) -> usize {
        match m {
            2 => (j + 1) % self.vertices.len(),
            _ => j,
        }
    }

    /// `∫_{γ_{m,j,k}} |dz/(ξ - z)|` for `m ∈ {1, 2}` (equal to `log ρ`);
    /// plain arclength for `m = 0`.
    pub fn subsegment_weight_mass(&self, index: PieceIndex) -> Result<f64> {
        let seg = self
            .subsegment(index)
            .ok_or_else(|| Error::Precondition(format!("no subsegment {index:?}")))?;
        Ok(match seg.anchor {
            Some(a) => weight_mass(self.vertices.vertex(a), seg.start, seg.end, 48),
            None => seg.length(),
        })
    }

    /// Closed counterclockwise chain of all pieces.
    pub fn closed_chain(&self) -> Vec<(C64, C64)> {
        let mut out = Vec::new();
        for j in 0..self.vertices.len() {
            out.push(self.outgoing[j]);
            out.extend(self.segments(0, j));
            out.push(self.incoming[j]);
        }
        out
    }

    /// `(1/2πi) ∮ dz/z`, exact on straight pieces.
    pub fn winding_number(&self) -> f64 {
        winding(&self.closed_chain())
    }

    /// Point chains per `(m, j)`: columns `m,j,x,y`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("m,j,x,y\n");
        for j in 0..self.vertices.len() {
            for m in [1u8, 0, 2] {
                let segs = self.segments(m, j);
                let mut pts = vec![segs[0].0];
                pts.extend(segs.iter().map(|s| s.1));
                for z in pts {
                    let _ = writeln!(out, "{m},{j},{:.12},{:.12}", z.re, z.im);
                }
            }
        }
        out
    }
}

fn winding(chain: &[(C64, C64)]) -> f64 {
    chain.iter().map(|&(a, b)| oriented_angle(a, b)).sum::<f64>() / TAU
}

/// Largest `ρ` for which discs of radius `l(ρ^{-k} - ρ^{-k-1})` centred on the
/// outgoing segment clear the tangent line of `∂E_r`, shrunk by 10% and
/// capped at the default.
fn default_rho(inner: &StolzDomain, seg: &(C64, C64)) -> f64 {
    let (x, w) = *seg;
    let r = inner.radius();
    let dir = (w - x) / (w - x).norm();
    let touch = x * C64::from_polar(r, r.acos());
    let tangent = (touch - x) / (touch - x).norm();
    let sin = (dir * tangent.conj()).im.abs();
    let limit = (2.0 + sin) / (2.0 - sin);
    (1.0 + 0.9 * (limit - 1.0)).min(DEFAULT_RHO)
}

/// Mid-locus between `∂E_r` and `∂E_s` in polar angle from `a` to `b`
/// (counterclockwise), with the radial offset at the ends blended so the
/// chain starts at `a` and ends at `b`, then greedily cut into chords of
/// length `≤ δ/2` and chord error `≤ δ/4`.
fn polyline(inner: &StolzDomain, outer: &StolzDomain, a: C64, b: C64, r_prime: f64, delta: f64) -> Result<Vec<C64>> {
    let t0 = a.arg();
    let mut sweep = oriented_angle(a, b);
    if sweep <= 0.0 {
        sweep += TAU;
    }
    let mid = |theta: f64| 0.5 * (inner.radial_boundary(theta) + outer.radial_boundary(theta));
    let off_a = r_prime - mid(t0);
    let off_b = r_prime - mid(t0 + sweep);
    let approx_len = sweep * r_prime;
    let count = (2000.0f64).max(40.0 * approx_len / (0.5 * delta)).ceil() as usize;
    let mut pts: Vec<C64> = (0..=count)
        .map(|i| {
            let tau = i as f64 / count as f64;
            let theta = t0 + sweep * tau;
            C64::from_polar(mid(theta) + off_a * (1.0 - tau) + off_b * tau, theta)
        })
        .collect();
    pts[0] = a;
    pts[count] = b;

    let max_len = 0.5 * delta;
    let max_dev = 0.25 * delta;
    let mut chain = vec![a];
    let mut i = 0;
    while i < count {
        let mut best = None;
        for j in i + 1..=count {
            if (pts[j] - pts[i]).norm() > max_len {
                break;
            }
            let ok = (i + 1..j).all(|m| crate::geometry::point_segment_distance(pts[m], pts[i], pts[j]) <= max_dev);
            if !ok {
                break;
            }
            best = Some(j);
        }
        let j = best.ok_or_else(|| {
            Error::FmConstruction("polyline sampling too coarse for the requested delta".into())
        })?;
        chain.push(pts[j]);
        i = j;
    }
    Ok(chain)
}

#[allow(clippy::too_many_arguments)]
fn subsegments(
    vertices: &UnimodularVertexSet,
    outgoing: &[(C64, C64)],
    incoming: &[(C64, C64)],
    polylines: &[Vec<C64>],
    l: f64,
    rho: f64,
    delta: f64,
    k_max: usize,
) -> Vec<Subsegment> {
    let n = vertices.len();
    let mut out = Vec::new();
    for j in 0..n {
        let (x, w) = outgoing[j];
        let dir = (w - x) / l;
        for k in 0..=k_max {
            let near = l * rho.powi(-(k as i32) - 1);
            let far = l * rho.powi(-(k as i32));
            let (start, end) = (x + dir * near, x + dir * far);
            out.push(Subsegment {
                index: PieceIndex::new(1, j, k),
                start,
                end,
                center: 0.5 * (start + end),
                disc_radius: far - near,
                anchor: Some(j),
            });
        }
        for (k, pair) in polylines[j].windows(2).enumerate() {
            out.push(Subsegment {
                index: PieceIndex::new(0, j, k),
                start: pair[0],
                end: pair[1],
                center: 0.5 * (pair[0] + pair[1]),
                disc_radius: delta,
                anchor: None,
            });
        }
        let (v, x) = incoming[j];
        let dir = (v - x) / l;
        for k in 0..=k_max {
            let near = l * rho.powi(-(k as i32) - 1);
            let far = l * rho.powi(-(k as i32));
            let (start, end) = (x + dir * far, x + dir * near);
            out.push(Subsegment {
                index: PieceIndex::new(2, j, k),
                start,
                end,
                center: 0.5 * (start + end),
                disc_radius: far - near,
                anchor: Some((j + 1) % n),
            });
        }
    }
    out
}

#[allow(clippy::too_many_arguments)]
fn clearance_report(
    inner: &StolzDomain,
    outer: &StolzDomain,
    subsegments: &[Subsegment],
    polylines: &[Vec<C64>],
    outgoing: &[(C64, C64)],
    incoming: &[(C64, C64)],
    delta: f64,
    l: f64,
    rho: f64,
    k_max: usize,
    segment_inner: f64,
    segment_outer: f64,
) -> ClearanceReport {
    let mut disc_inner = f64::INFINITY;
    let mut disc_outer = f64::INFINITY;
    for seg in subsegments.iter().filter(|s| s.anchor.is_some()) {
        disc_inner = disc_inner.min(-inner.margin(seg.center) - seg.disc_radius);
        disc_outer = disc_outer.min(outer.margin(seg.center) - seg.disc_radius);
    }
    let mut polyline_inner = f64::INFINITY;
    let mut polyline_outer = f64::INFINITY;
    let mut max_polyline_length: f64 = 0.0;
    for chain in polylines {
        for pair in chain.windows(2) {
            max_polyline_length = max_polyline_length.max((pair[1] - pair[0]).norm());
            for i in 0..=16 {
                let z = pair[0] + (pair[1] - pair[0]) * (i as f64 / 16.0);
                polyline_inner = polyline_inner.min(-inner.margin(z) - delta);
                polyline_outer = polyline_outer.min(outer.margin(z) - delta);
            }
        }
    }
    let mut chain = Vec::new();
    for j in 0..polylines.len() {
        chain.push(outgoing[j]);
        chain.extend(polylines[j].windows(2).map(|w| (w[0], w[1])));
        chain.push(incoming[j]);
    }
    let named = [
        ("disc D_{m,j,k} against ∂E_r", disc_inner),
        ("polyline Γ_0 against ∂E_r", polyline_inner),
        ("polyline Γ_0 against ∂E_s", polyline_outer),
    ];
    let binding = named
        .iter()
        .min_by(|a, b| a.1.total_cmp(&b.1))
        .map(|(name, _)| name.to_string())
        .unwrap_or_default();
    ClearanceReport {
        disc_inner,
        disc_outer,
        polyline_inner,
        polyline_outer,
        segment_inner,
        segment_outer,
        max_polyline_length,
        coverage_gap: l * rho.powi(-(k_max as i32) - 1),
        winding_number: winding(&chain),
        binding,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn build(n: usize, r: f64, s: f64) -> FMContour {
        FMContour::build(&UnimodularVertexSet::roots_of_unity(n), r, s, &FmParams::default()).unwrap()
    }

    #[test]
    fn contour_examples() {
        let c = build(1, 0.6, 0.8);
        assert_abs_diff_eq!(c.winding_number(), 1.0, epsilon = 1e-6);
        assert!(c.clearance().disc_inner > 0.0);
        for n in [2, 3] {
            let c = build(n, 0.6, 0.8);
            assert_abs_diff_eq!(c.winding_number(), 1.0, epsilon = 1e-6);
            for j in 0..n {
                let (a, b) = c.segments(1, j)[0];
                assert_abs_diff_eq!((b - a).norm(), c.l(), epsilon = 1e-12);
                let (a, b) = c.segments(2, j)[0];
                assert_abs_diff_eq!((b - a).norm(), c.l(), epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn invariants_hold_for_defaults() {
        for n in 1..=3 {
            let c = build(n, 0.6, 0.8);
            let rep = c.clearance();
            assert!(rep.polyline_inner > 0.0 && rep.polyline_outer > 0.0);
            assert!(rep.max_polyline_length <= 0.5 * c.delta() + 1e-15);
            assert_abs_diff_eq!(rep.coverage_gap, c.l() * c.rho().powi(-(c.k_max() as i32) - 1));
            // polyline starts and ends on the vertex segments
            for j in 0..n {
                let p = c.segments(0, j);
                assert_eq!(p[0].0, c.segments(1, j)[0].1);
                assert_eq!(p.last().unwrap().1, c.segments(2, j)[0].0);
            }
        }
    }

    #[test]
    fn weight_masses() {
        let c = build(2, 0.6, 0.8);
        for m in [1, 2] {
            for k in [0, 7, 40] {
                let mass = c.subsegment_weight_mass(PieceIndex::new(m, 1, k)).unwrap();
                assert_abs_diff_eq!(mass, c.rho().ln(), epsilon = 1e-10);
            }
        }
        let len = c.subsegment_weight_mass(PieceIndex::new(0, 0, 3)).unwrap();
        assert!(len <= c.clearance().max_polyline_length + 1e-15);
        let x = C64::new(1.0, 0.0);
        let dir = C64::from_polar(1.0, 2.5);
        let e = std::f64::consts::E;
        assert_abs_diff_eq!(weight_mass(x, x + dir * 0.1 / e, x + dir * 0.1, 48), 1.0, epsilon = 1e-10);
    }

    #[test]
    fn bad_parameters_name_the_failure() {
        let e = UnimodularVertexSet::roots_of_unity(2);
        let err = FMContour::build(&e, 0.6, 0.8, &FmParams { rho: Some(3.0), ..FmParams::default() }).unwrap_err();
        assert!(err.to_string().contains("∂E_r"), "{err}");
        let err = FMContour::build(&e, 0.6, 0.8, &FmParams { r_prime: Some(0.9), ..FmParams::default() }).unwrap_err();
        assert!(err.to_string().contains("r'"));
        let err = FMContour::build(&e, 0.6, 0.8, &FmParams { delta: Some(0.3), ..FmParams::default() }).unwrap_err();
        assert!(err.to_string().contains("polyline"), "{err}");
        assert!(FMContour::build(&UnimodularVertexSet::roots_of_unity(3), 0.3, 0.8, &FmParams::default()).is_err());
    }

    #[test]
    fn csv_has_all_chains() {
        let c = build(2, 0.6, 0.8);
        let csv = c.to_csv();
        assert!(csv.starts_with("m,j,x,y\n"));
        assert!(csv.lines().any(|l| l.starts_with("2,1,")));
    }
}
