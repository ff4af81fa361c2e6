//! Fitted constants for the decay model `|Φ_{m,j,k,p}(ξ)| ≈ c 2^{-p} ρ^{-e/2}`
//! (`e = |k - q|` in the band `q` around the anchor vertex, `e = k` away
//! from it, `e = 0` on the polyline) and the kernel bounds behind it.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::calculus::interior_grid;
use crate::error::Result;
use crate::fm::basis::FMBasis;
use crate::fm::contour::FMContour;
use crate::fm::decomposition::{band_index, kernel, phi_all};
use crate::C64;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DecaySettings {
    pub k_max: usize,
    pub p_max: usize,
    pub q_max: usize,
    /// Directions per band inside the Stolz angle.
    pub directions: usize,
    /// Size of the interior grid used away from the vertices.
    pub grid: usize,
}

impl Default for DecaySettings {
    fn default() -> Self {
        Self {
            k_max: 15,
            p_max: 15,
            q_max: 20,
            directions: 3,
            grid: 200,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Region {
    /// `ξ` in a band `B_{j,q}` of the anchor vertex.
    Band,
    /// `ξ` farther than `l` from the anchor vertex.
    Away,
    /// Polyline pieces, any `ξ`.
    Polyline,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SectorFit {
    pub m: u8,
    pub j: usize,
    pub region: Region,
    /// Least squares on the log scale against the per-`(p, e)` maxima of
    /// `|Φ| / model` (the envelope the bound has to follow).
    pub c_fit: f64,
    /// `max |Φ| / model` over the lattice.
    pub c_sup: f64,
    /// `max |Φ| / (5 c_fit model)`; at most 1 when the model holds.
    pub worst_ratio: f64,
    pub samples: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecayFit {
    pub sectors: Vec<SectorFit>,
    /// Least-squares slope of `log max_{ξ,k} |Φ| ρ^{e/2}` against `p`.
    pub p_slope: f64,
    /// `|p_slope + log 2| / log 2`.
    pub slope_relative_error: f64,
    /// `max_p` envelope used for the slope, per degree.
    pub envelope: Vec<f64>,
    pub settings: DecaySettings,
}

impl DecayFit {
    pub fn sector(&self, m: u8, j: usize, region: Region) -> Option<&SectorFit> {
        self.sectors.iter().find(|s| s.m == m && s.j == j && s.region == region)
    }

    /// Constant for tail bounds: the lattice supremum of the sector.
    pub fn tail_constant(&self, m: u8, j: usize, in_band: bool) -> f64 {
        let region = match (m, in_band) {
            (0, _) => Region::Polyline,
            (_, true) => Region::Band,
            (_, false) => Region::Away,
        };
        self.sector(m, j, region).map_or(0.0, |s| s.c_sup)
    }

    /// True when every sampled value satisfies the model with the fitted
    /// constant times 5.
    pub fn model_holds(&self) -> bool {
        self.sectors.iter().all(|s| s.worst_ratio <= 1.0)
    }
}

/// Sample points of `E_r`: for each vertex, `directions` points in the
/// middle of every band `q ≤ q_max`, plus an interior grid.
pub fn sample_points(contour: &FMContour, settings: &DecaySettings) -> Vec<C64> {
    let domain = contour.inner_domain();
    let r = contour.r();
    let half_angle = r.asin();
    let mut out = Vec::new();
    for &x in contour.vertices().vertices() {
        for q in 0..=settings.q_max {
            let d = contour.l() * contour.rho().powf(-(q as f64) - 0.5);
            for i in 0..settings.directions {
                let frac = if settings.directions == 1 {
                    0.0
                } else {
                    -0.6 + 1.2 * i as f64 / (settings.directions - 1) as f64
                };
                let z = x - x * C64::from_polar(d, frac * half_angle);
                if domain.contains(z) {
                    out.push(z);
                }
            }
        }
    }
    out.extend(interior_grid(&domain, settings.grid));
    out
}

struct Sample {
    m: u8,
    j: usize,
    region: Region,
    p: usize,
    e: usize,
    /// `log |Φ| + (e/2) log ρ`, i.e. `|Φ|` with the `k`-decay removed.
    log_scaled: f64,
}

/// Fits the decay constants on the lattice `k ≤ k_max`, `p ≤ p_max` and
/// the band indices `q ≤ q_max` of the sample points.
pub fn fit_decay(contour: &FMContour, basis: &FMBasis, settings: &DecaySettings) -> Result<DecayFit> {
    let points = sample_points(contour, settings);
    let ln_rho = contour.rho().ln();
    let p_max = settings.p_max.min(basis.p_max());
    let samples: Vec<Sample> = points
        .par_iter()
        .flat_map_iter(|&xi| {
            let mut local = Vec::new();
            for entry in basis.entries() {
                let idx = entry.index;
                let (region, e) = if idx.m == 0 {
                    (Region::Polyline, 0)
                } else {
                    if idx.k > settings.k_max {
                        continue;
                    }
                    match band_index(contour, contour.anchor(idx.m, idx.j), xi) {
                        Some(q) if q <= settings.q_max => (Region::Band, idx.k.abs_diff(q)),
                        Some(_) => continue,
                        None => (Region::Away, idx.k),
                    }
                };
                for (p, f) in phi_all(contour.vertices(), entry, xi, p_max).iter().enumerate() {
                    let a = f.norm();
                    if a > 0.0 {
                        local.push(Sample {
                            m: idx.m,
                            j: idx.j,
                            region,
                            p,
                            e,
                            log_scaled: a.ln() + 0.5 * e as f64 * ln_rho,
                        });
                    }
                }
            }
            local
        })
        .collect();

    let ln2 = std::f64::consts::LN_2;
    let mut sectors = Vec::new();
    for j in 0..contour.vertices().len() {
        for (m, region) in [(1u8, Region::Band), (1, Region::Away), (2, Region::Band), (2, Region::Away), (0, Region::Polyline)] {
            let mut cells: BTreeMap<(usize, usize), (f64, usize)> = BTreeMap::new();
            for smp in samples.iter().filter(|x| x.m == m && x.j == j && x.region == region) {
                let v = smp.log_scaled + smp.p as f64 * ln2;
                let cell = cells.entry((smp.p, smp.e)).or_insert((f64::NEG_INFINITY, 0));
                cell.0 = cell.0.max(v);
                cell.1 += 1;
            }
            if cells.is_empty() {
                continue;
            }
            let count: usize = cells.values().map(|c| c.1).sum();
            let mean = cells.values().map(|c| c.0).sum::<f64>() / cells.len() as f64;
            let sup = cells.values().map(|c| c.0).fold(f64::NEG_INFINITY, f64::max);
            sectors.push(SectorFit {
                m,
                j,
                region,
                c_fit: mean.exp(),
                c_sup: sup.exp(),
                worst_ratio: (sup - mean).exp() / 5.0,
                samples: count,
            });
        }
    }

    let envelope: Vec<f64> = (0..=p_max)
        .map(|p| {
            samples
                .iter()
                .filter(|s| s.p == p && s.m != 0)
                .map(|s| s.log_scaled)
                .fold(f64::NEG_INFINITY, f64::max)
        })
        .collect();
    let p_slope = slope(&envelope);
    Ok(DecayFit {
        sectors,
        p_slope,
        slope_relative_error: (p_slope + ln2).abs() / ln2,
        envelope: envelope.iter().map(|v| v.exp()).collect(),
        settings: *settings,
    })
}

/// Least-squares slope of `values[i]` against `i`.
fn slope(values: &[f64]) -> f64 {
    let n = values.len() as f64;
    let mx = (n - 1.0) / 2.0;
    let my = values.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx) = (0.0, 0.0);
    for (i, v) in values.iter().enumerate() {
        sxy += (i as f64 - mx) * (v - my);
        sxx += (i as f64 - mx).powi(2);
    }
    sxy / sxx
}

/// Constants of the kernel estimates sampled over the discs and a grid.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KernelBounds {
    /// `max (|1 - conj(ξ_j) z| ∨ |1 - conj(ξ_j) ξ|) / |z - ξ|`.
    pub uniform: f64,
    /// `max |K(z, ξ)| ρ^{|k-q|/2}` over band points.
    pub band: f64,
    /// `max |K(z, ξ)| ρ^{k/2}` over points farther than `l`.
    pub away: f64,
    /// `max |K(z, ξ)|` over the polyline discs.
    pub polyline: f64,
}

/// Samples each disc at its centre and 8 points at 0.999 of its radius,
/// for vertex pieces with `k ≤ k_max`.
pub fn kernel_bounds(contour: &FMContour, grid: &[C64], k_max: usize) -> Result<KernelBounds> {
    let rho = contour.rho();
    let xs = contour.vertices().vertices();
    let mut b = KernelBounds {
        uniform: 0.0,
        band: 0.0,
        away: 0.0,
        polyline: 0.0,
    };
    for seg in contour.subsegments() {
        if seg.anchor.is_some() && seg.index.k > k_max {
            continue;
        }
        let disc: Vec<C64> = std::iter::once(seg.center)
            .chain((0..8).map(|i| {
                seg.center + C64::from_polar(0.999 * seg.disc_radius, std::f64::consts::TAU * i as f64 / 8.0)
            }))
            .collect();
        for &xi in grid {
            for &z in &disc {
                let dz = (z - xi).norm();
                let anchors: Vec<usize> = match seg.anchor {
                    Some(a) => vec![a],
                    None => (0..xs.len()).collect(),
                };
                for a in anchors {
                    let x = xs[a];
                    let u = (1.0 - x.conj() * z).norm().max((1.0 - x.conj() * xi).norm()) / dz;
                    b.uniform = b.uniform.max(u);
                }
                let kv = kernel(contour, z, xi)?.norm();
                match seg.anchor {
                    None => b.polyline = b.polyline.max(kv),
                    Some(a) => match band_index(contour, a, xi) {
                        Some(q) => {
                            let e = (seg.index.k as f64 - q as f64).abs();
                            b.band = b.band.max(kv * rho.powf(0.5 * e));
                        }
                        None => b.away = b.away.max(kv * rho.powf(0.5 * seg.index.k as f64)),
                    },
                }
            }
        }
    }
    Ok(b)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fm::basis::build_basis;
    use crate::fm::contour::FmParams;
    use crate::fm::decomposition::{half_power_sum, Truncation};
    use crate::geometry::UnimodularVertexSet;

    #[test]
    fn decay_fit_and_kernel_bounds_are_finite() {
        let c = FMContour::build(&UnimodularVertexSet::roots_of_unity(2), 0.6, 0.8, &FmParams::default()).unwrap();
        let b = build_basis(&c, 15).unwrap();
        let settings = DecaySettings {
            q_max: 10,
            grid: 40,
            ..DecaySettings::default()
        };
        let fit = fit_decay(&c, &b, &settings).unwrap();
        assert!(fit.sectors.iter().all(|s| s.c_fit.is_finite() && s.c_sup >= s.c_fit));
        assert!(fit.p_slope < 0.0);
        let pts = sample_points(&c, &settings);
        let kb = kernel_bounds(&c, &pts, 15).unwrap();
        assert!(kb.uniform.is_finite() && kb.band.is_finite() && kb.away.is_finite());
        let hp = half_power_sum(&c, &b, &fit, C64::new(0.1, 0.2), Truncation::new(10, 8)).unwrap();
        assert!(hp.total.is_finite() && hp.tail > 0.0);
    }
}
