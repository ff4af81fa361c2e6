use std::f64::consts::PI;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::calculus::boundary_grid;
use crate::error::{Error, Result};
use crate::fm::basis::{BasisEntry, FMBasis};
use crate::fm::contour::{FMContour, PieceIndex};
use crate::fm::decay::DecayFit;
use crate::geometry::UnimodularVertexSet;
use crate::quadrature::gauss_legendre;
use crate::C64;

/// Index `(m, j, k, p)` of a member of the universal family.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct FmIndex {
    pub m: u8,
    pub j: usize,
    pub k: usize,
    pub p: usize,
}

impl FmIndex {
    pub fn new(m: u8, j: usize, k: usize, p: usize) -> Self {
        Self { m, j, k, p }
    }

    pub fn piece(&self) -> PieceIndex {
        PieceIndex::new(self.m, self.j, self.k)
    }
}

/// Truncation of the double sum: vertex pieces with `k ≤ k_cut`, all
/// polyline pieces, and degrees `p ≤ p_cut`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Truncation {
    pub k_cut: usize,
    pub p_cut: usize,
}

impl Truncation {
    pub fn new(k_cut: usize, p_cut: usize) -> Self {
        Self { k_cut, p_cut }
    }

    fn keeps(&self, index: PieceIndex) -> bool {
        index.m == 0 || index.k <= self.k_cut
    }
}

/// `K(z, ξ) = Π_j (1 - conj(ξ_j) z)^{1/2} (1 - conj(ξ_j) ξ)^{1/2} / (z - ξ)`
/// with principal square roots.
pub fn kernel(contour: &FMContour, z: C64, xi: C64) -> Result<C64> {
    kernel_for(contour.vertices(), z, xi)
}

fn kernel_for(vertices: &UnimodularVertexSet, z: C64, xi: C64) -> Result<C64> {
    if z == xi {
        return Err(Error::SingularResolvent { re: z.re, im: z.im });
    }
    let num: C64 = vertices
        .vertices()
        .iter()
        .map(|x| (1.0 - x.conj() * z).sqrt() * (1.0 - x.conj() * xi).sqrt())
        .product();
    Ok(num / (z - xi))
}

/// `K(z, ξ) / Π_d (1 - conj(ξ_d) z)`, written without the cancelling factor.
fn cauchy_density(vertices: &UnimodularVertexSet, z: C64, xi: C64) -> C64 {
    let ratio: C64 = vertices
        .vertices()
        .iter()
        .map(|x| (1.0 - x.conj() * xi).sqrt() / (1.0 - x.conj() * z).sqrt())
        .product();
    ratio / (z - xi)
}

fn check_inner(contour: &FMContour, xi: C64) -> Result<()> {
    if contour.inner_domain().contains(xi) {
        Ok(())
    } else {
        Err(Error::Domain {
            name: "xi",
            value: xi.norm(),
            expected: "a point of E_r",
        })
    }
}

/// `Φ_{m,j,k,p}(ξ)` for `p = 0..=p_cut` on one subsegment, from the stored
/// rule.
pub(crate) fn phi_all(vertices: &UnimodularVertexSet, entry: &BasisEntry, xi: C64, p_cut: usize) -> Vec<C64> {
    let scale = C64::new(0.0, 1.0 / (2.0 * PI));
    let g: Vec<C64> = entry
        .nodes()
        .iter()
        .zip(entry.dz())
        .map(|(&z, &dz)| cauchy_density(vertices, z, xi) * dz)
        .collect();
    (0..=p_cut.min(entry.degree()))
        .map(|p| {
            // 1/(2πi) = -i/(2π)
            let s: C64 = entry.values(p).iter().zip(&g).map(|(e, gi)| e.conj() * gi).sum();
            -s * scale
        })
        .collect()
}

/// `Φ` on one subsegment with an independent Gauss rule of the given order
/// (basis evaluated from its coefficients).
pub fn phi_with_order(contour: &FMContour, basis: &FMBasis, piece: PieceIndex, xi: C64, order: usize) -> Result<Vec<C64>> {
    check_inner(contour, xi)?;
    let entry = basis
        .entry(piece)
        .ok_or_else(|| Error::Precondition(format!("no basis for {piece:?}")))?;
    let seg = contour.subsegment(piece).expect("basis built from this contour");
    let (x, w) = gauss_legendre(order);
    let half = 0.5 * (seg.end - seg.start);
    let vertices = contour.vertices();
    Ok((0..=entry.degree())
        .map(|p| {
            let s: C64 = x
                .iter()
                .zip(&w)
                .map(|(&u, &wi)| {
                    let z = seg.point(u);
                    entry.eval(p, z).conj() * cauchy_density(vertices, z, xi) * half * wi
                })
                .sum();
            s / C64::new(0.0, 2.0 * PI)
        })
        .collect())
}

/// `Φ_{m,j,k,p}(ξ) = (1/2πi) ∫ conj(e_p(z)) K(z, ξ) dz / Π_d (1 - conj(ξ_d) z)`.
pub fn phi_function(contour: &FMContour, basis: &FMBasis, index: FmIndex, xi: C64) -> Result<C64> {
    check_inner(contour, xi)?;
    let entry = basis
        .entry(index.piece())
        .ok_or_else(|| Error::Precondition(format!("no basis for {index:?}")))?;
    if index.p > entry.degree() {
        return Err(Error::Precondition(format!("degree {} exceeds the basis", index.p)));
    }
    Ok(phi_all(contour.vertices(), entry, xi, index.p)[index.p])
}

/// Coefficients `α_{m,j,k,p} = ∫ h e_p w` for every stored index, with
/// `components` values each (1 for scalar `h`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FMCoefficients {
    pub components: usize,
    pieces: Vec<PieceIndex>,
    /// `values[entry][p][component]`.
    values: Vec<Vec<Vec<C64>>>,
    /// `max ‖α‖` over all indices.
    pub bound: f64,
    /// Boundary-grid estimate of `‖h‖_{∞, E_s}`.
    pub h_sup: f64,
    /// `bound / h_sup`.
    pub certificate_ratio: f64,
    /// Constant `C` with `‖α‖ ≤ C ‖h‖_{∞,E_s}`: the square root of the
    /// largest weight mass.
    pub constant: f64,
}

impl FMCoefficients {
    pub fn get(&self, index: FmIndex) -> Option<&[C64]> {
        let e = self.pieces.iter().position(|&p| p == index.piece())?;
        self.values[e].get(index.p).map(|v| v.as_slice())
    }

    pub fn scalar(&self, index: FmIndex) -> Option<C64> {
        self.get(index).map(|v| v[0])
    }

    /// All `(index, value)` records in storage order.
    pub fn records(&self) -> Vec<(FmIndex, Vec<C64>)> {
        let mut out = Vec::new();
        for (piece, vals) in self.pieces.iter().zip(&self.values) {
            for (p, v) in vals.iter().enumerate() {
                out.push((FmIndex::new(piece.m, piece.j, piece.k, p), v.clone()));
            }
        }
        out
    }

    /// Records as CSV: `m,j,k,p,component,re,im`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("m,j,k,p,component,re,im\n");
        for (idx, v) in self.records() {
            for (c, z) in v.iter().enumerate() {
                out.push_str(&format!("{},{},{},{},{c},{:e},{:e}\n", idx.m, idx.j, idx.k, idx.p, z.re, z.im));
            }
        }
        out
    }
}

/// Coefficients of a scalar function.
pub fn alpha_coefficients<F>(contour: &FMContour, basis: &FMBasis, h: F) -> FMCoefficients
where
    F: Fn(C64) -> C64 + Sync,
{
    alpha_coefficients_vector(contour, basis, 1, |z| vec![h(z)])
}

/// Coefficients of `h : E_s → C^L`, computed component by component with
/// the same arithmetic as the scalar case.
pub fn alpha_coefficients_vector<F>(contour: &FMContour, basis: &FMBasis, components: usize, h: F) -> FMCoefficients
where
    F: Fn(C64) -> Vec<C64> + Sync,
{
    let values: Vec<Vec<Vec<C64>>> = basis
        .entries()
        .par_iter()
        .map(|entry| {
            let hv: Vec<Vec<C64>> = entry.nodes().iter().map(|&z| h(z)).collect();
            (0..=entry.degree())
                .map(|p| {
                    (0..components)
                        .map(|c| {
                            entry
                                .values(p)
                                .iter()
                                .zip(&hv)
                                .zip(entry.measure())
                                .map(|((e, hz), w)| hz[c] * e * w)
                                .sum()
                        })
                        .collect()
                })
                .collect()
        })
        .collect();
    let bound = values
        .iter()
        .flatten()
        .map(|v: &Vec<C64>| v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt())
        .fold(0.0, f64::max);
    let grid = boundary_grid(&contour.outer_domain(), 400).expect("valid radius");
    let h_sup = grid
        .iter()
        .map(|&z| h(z).iter().map(|w| w.norm_sqr()).sum::<f64>().sqrt())
        .fold(0.0, f64::max);
    let constant = basis.entries().iter().map(|e| e.mass).fold(0.0, f64::max).sqrt();
    FMCoefficients {
        components,
        pieces: basis.entries().iter().map(|e| e.index).collect(),
        values,
        bound,
        h_sup,
        certificate_ratio: if h_sup > 0.0 { bound / h_sup } else { 0.0 },
        constant,
    }
}

/// Truncated `Σ α_{m,j,k,p} Φ_{m,j,k,p}(ξ)` (one value per component),
/// summed in storage order.
pub fn reconstruct_vector(
    contour: &FMContour,
    basis: &FMBasis,
    coeffs: &FMCoefficients,
    xi: C64,
    truncation: Truncation,
) -> Result<Vec<C64>> {
    check_inner(contour, xi)?;
    let mut total = vec![C64::new(0.0, 0.0); coeffs.components];
    for (entry, alpha) in basis.entries().iter().zip(&coeffs.values) {
        if !truncation.keeps(entry.index) {
            continue;
        }
        let phi = phi_all(contour.vertices(), entry, xi, truncation.p_cut);
        for (a, f) in alpha.iter().zip(&phi) {
            for (t, ac) in total.iter_mut().zip(a) {
                *t += ac * f;
            }
        }
    }
    Ok(total)
}

pub fn reconstruct(
    contour: &FMContour,
    basis: &FMBasis,
    coeffs: &FMCoefficients,
    xi: C64,
    truncation: Truncation,
) -> Result<C64> {
    Ok(reconstruct_vector(contour, basis, coeffs, xi, truncation)?[0])
}

/// Worst reconstruction error of a scalar `h` over a grid.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReconstructionError {
    pub max_error: f64,
    pub argmax: C64,
    pub truncation: Truncation,
}

pub fn reconstruction_error<F>(
    contour: &FMContour,
    basis: &FMBasis,
    coeffs: &FMCoefficients,
    h: F,
    grid: &[C64],
    truncation: Truncation,
) -> Result<ReconstructionError>
where
    F: Fn(C64) -> C64 + Sync,
{
    let errs = grid
        .par_iter()
        .map(|&xi| Ok(((reconstruct(contour, basis, coeffs, xi, truncation)? - h(xi)).norm(), xi)))
        .collect::<Result<Vec<_>>>()?;
    let (max_error, argmax) = errs
        .into_iter()
        .fold((0.0, C64::new(0.0, 0.0)), |acc, e| if e.0 > acc.0 { e } else { acc });
    Ok(ReconstructionError {
        max_error,
        argmax,
        truncation,
    })
}

/// The `q` with `l ρ^{-q-1} ≤ |ξ_j - ξ| ≤ l ρ^{-q}`, or `None` when
/// `|ξ_j - ξ| > l`. A distance exactly `l ρ^{-q}` is assigned `q`.
pub fn band_index(contour: &FMContour, j: usize, xi: C64) -> Option<usize> {
    band_of(contour.l(), contour.rho(), (contour.vertices().vertex(j) - xi).norm())
}

pub(crate) fn band_of(l: f64, rho: f64, d: f64) -> Option<usize> {
    if d > l || d <= 0.0 {
        return None;
    }
    let x = (l / d).ln() / rho.ln();
    let nearest = x.round();
    let x = if (x - nearest).abs() <= 1e-9 * x.max(1.0) { nearest } else { x };
    Some(x.floor() as usize)
}

/// `Σ |Φ|^{1/2}` truncated, with the tail bounded by the fitted decay model.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HalfPowerSum {
    pub truncated: f64,
    pub tail: f64,
    pub total: f64,
}

fn geometric_tail(ratio: f64, from: usize) -> f64 {
    ratio.powi(from as i32) / (1.0 - ratio)
}

pub fn half_power_sum(
    contour: &FMContour,
    basis: &FMBasis,
    fit: &DecayFit,
    xi: C64,
    truncation: Truncation,
) -> Result<HalfPowerSum> {
    check_inner(contour, xi)?;
    let p_cut = truncation.p_cut.min(basis.p_max());
    let mut truncated = 0.0;
    for entry in basis.entries() {
        if !truncation.keeps(entry.index) || entry.index.k > contour.k_max() {
            continue;
        }
        truncated += phi_all(contour.vertices(), entry, xi, p_cut)
            .iter()
            .map(|f| f.norm().sqrt())
            .sum::<f64>();
    }
    // (c 2^{-p} ρ^{-e/2})^{1/2} summed over the excluded lattice
    let half_p = 0.5f64.sqrt();
    let p_tail = geometric_tail(half_p, p_cut + 1);
    let p_all = 1.0 / (1.0 - half_p);
    let rq = contour.rho().powf(-0.25);
    let k_cut = truncation.k_cut.min(contour.k_max());
    let n = contour.vertices().len();
    let mut tail = 0.0;
    for j in 0..n {
        for m in [1u8, 2] {
            let a = contour.anchor(m, j);
            let q = band_index(contour, a, xi);
            let c = fit.tail_constant(m, j, q.is_some()).sqrt();
            let e = |k: usize| match q {
                Some(q) => (k as f64 - q as f64).abs(),
                None => k as f64,
            };
            let kept: f64 = (0..=k_cut).map(|k| rq.powf(e(k))).sum();
            let beyond = match q {
                Some(q) if q > k_cut => {
                    (k_cut + 1..=q).map(|k| rq.powf(e(k))).sum::<f64>() + geometric_tail(rq, 1)
                }
                _ => rq.powf(e(k_cut + 1)) / (1.0 - rq),
            };
            tail += c * (kept * p_tail + beyond * p_all);
        }
        let c0 = fit.tail_constant(0, j, false).sqrt();
        tail += c0 * contour.polyline_len(j) as f64 * p_tail;
    }
    Ok(HalfPowerSum {
        truncated,
        tail,
        total: truncated + tail,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::calculus::interior_grid;
    use crate::fm::basis::build_basis;
    use crate::fm::contour::FmParams;
    use approx::assert_abs_diff_eq;

    fn setup(n: usize) -> (FMContour, FMBasis) {
        let c = FMContour::build(&UnimodularVertexSet::roots_of_unity(n), 0.6, 0.8, &FmParams::default()).unwrap();
        let b = build_basis(&c, 20).unwrap();
        (c, b)
    }

    #[test]
    fn kernel_examples() {
        let (c, _) = setup(1);
        let z = c.subsegment(PieceIndex::new(0, 0, 5)).unwrap().center;
        let k = kernel(&c, z, C64::new(0.0, 0.0)).unwrap();
        assert_abs_diff_eq!((k - (1.0 - z).sqrt() / z).norm(), 0.0, epsilon = 1e-14);
        let (c2, _) = setup(2);
        let xi = C64::new(0.2, 0.1);
        let a = kernel(&c2, z, xi).unwrap();
        let b = kernel(&c2, z.conj(), xi.conj()).unwrap();
        assert_abs_diff_eq!((a - b.conj()).norm(), 0.0, epsilon = 1e-14);
        assert!(kernel(&c2, xi, xi).is_err());
    }

    #[test]
    fn band_index_examples() {
        let (c, _) = setup(2);
        let (l, rho) = (c.l(), c.rho());
        let x = c.vertices().vertex(0);
        let inward = -x;
        assert_eq!(band_index(&c, 0, x + inward * l * rho.powf(-3.5)), Some(3));
        assert_eq!(band_index(&c, 0, x + inward * (1.01 * l)), None);
        assert_eq!(band_of(l, rho, l * rho.powi(-4)), Some(4));
        assert_eq!(band_of(l, rho, l), Some(0));
    }

    #[test]
    fn alpha_examples() {
        let (c, b) = setup(2);
        let zero = alpha_coefficients(&c, &b, |_| C64::new(0.0, 0.0));
        assert!(zero.records().iter().all(|(_, v)| v[0] == C64::new(0.0, 0.0)));
        let one = alpha_coefficients(&c, &b, |_| C64::new(1.0, 0.0));
        for (idx, v) in one.records() {
            if idx.m != 0 && idx.p == 0 {
                assert_abs_diff_eq!(v[0].re, c.rho().ln().sqrt(), epsilon = 1e-12);
            }
            if idx.p >= 1 {
                assert!(v[0].norm() <= 1e-9, "{idx:?} {}", v[0]);
            }
        }
        assert!(one.certificate_ratio <= one.constant + 1e-12);
        let f = |z: C64| z * z - 0.3;
        let g = |z: C64| (1.0 - z).sqrt();
        let (a, bb) = (C64::new(0.5, -2.0), C64::new(1.5, 0.25));
        let af = alpha_coefficients(&c, &b, f);
        let ag = alpha_coefficients(&c, &b, g);
        let afg = alpha_coefficients(&c, &b, |z| a * f(z) + bb * g(z));
        for ((x, y), z) in af.records().iter().zip(ag.records()).zip(afg.records()) {
            assert!((a * x.1[0] + bb * y.1[0] - z.1[0]).norm() <= 1e-10);
        }
        let vec = alpha_coefficients_vector(&c, &b, 2, |z| vec![f(z), g(z)]);
        for ((x, y), v) in af.records().iter().zip(ag.records()).zip(vec.records()) {
            assert_eq!(x.1[0], v.1[0]);
            assert_eq!(y.1[0], v.1[1]);
        }
    }

    #[test]
    fn phi_is_self_convergent_and_checked() {
        let (c, b) = setup(2);
        let xi = C64::new(0.3, 0.2);
        for piece in [PieceIndex::new(1, 0, 3), PieceIndex::new(0, 1, 10), PieceIndex::new(2, 1, 12)] {
            let base = phi_with_order(&c, &b, piece, xi, 48).unwrap();
            let fine = phi_with_order(&c, &b, piece, xi, 96).unwrap();
            for (x, y) in base.iter().zip(&fine) {
                assert!((x - y).norm() < 1e-8);
            }
            let direct = phi_function(&c, &b, FmIndex::new(piece.m, piece.j, piece.k, 2), xi).unwrap();
            assert!((direct - base[2]).norm() < 1e-12);
        }
        assert!(phi_function(&c, &b, FmIndex::new(1, 0, 0, 0), C64::new(0.0, 0.79)).is_err());
    }

    #[test]
    fn reconstruction_is_exact_once_the_vertex_tail_is_negligible() {
        let params = FmParams {
            k_max: 250,
            ..FmParams::default()
        };
        let c = FMContour::build(&UnimodularVertexSet::roots_of_unity(2), 0.6, 0.8, &params).unwrap();
        let b = build_basis(&c, 12).unwrap();
        let grid = interior_grid(&c.inner_domain(), 30);
        // vanishing at the vertices: the dropped tail is O(l ρ^{-k})
        let h = |z: C64| (1.0 - z * z) * (1.0 + 2.0 * z);
        let coeffs = alpha_coefficients(&c, &b, h);
        let coarse = reconstruction_error(&c, &b, &coeffs, h, &grid, Truncation::new(20, 12)).unwrap();
        let fine = reconstruction_error(&c, &b, &coeffs, h, &grid, Truncation::new(250, 12)).unwrap();
        assert!(fine.max_error < 1e-8, "{fine:?}");
        assert!(coarse.max_error > 1e3 * fine.max_error);
        // a nonzero vertex value leaves an O((l ρ^{-k})^{1/2}) tail
        let one = alpha_coefficients(&c, &b, |_| C64::new(1.0, 0.0));
        let err = reconstruction_error(&c, &b, &one, |_| C64::new(1.0, 0.0), &grid, Truncation::new(250, 12)).unwrap();
        assert!(err.max_error < 1e-2, "{err:?}");
    }
}
