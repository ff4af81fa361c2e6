use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fm::contour::{FMContour, PieceIndex, Subsegment};
use crate::quadrature::gauss_legendre;
use crate::C64;

/// Orthonormal polynomials `e_0..e_P` on one subsegment, stored as
/// coefficients in `t = (z - center) / scale`, together with the Gauss rule
/// used for every integral over the subsegment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BasisEntry {
    pub index: PieceIndex,
    pub center: C64,
    pub scale: f64,
    /// `coefficients[p][i]` multiplies `t^i` in `e_p`.
    pub coefficients: Vec<Vec<C64>>,
    /// Total mass of the weight on the subsegment.
    pub mass: f64,
    pub gram_residual: f64,
    anchor: Option<C64>,
    nodes: Vec<C64>,
    /// Complex `dz` weights of the rule.
    dz: Vec<C64>,
    /// Real weights of the measure (`|dz|/|ξ - z|` or `|dz|`).
    measure: Vec<f64>,
    /// `values[p][i] = e_p(nodes[i])`.
    values: Vec<Vec<C64>>,
}

/// The weighted measure of a subsegment evaluated by a Gauss rule of the
/// given order.
struct Rule {
    nodes: Vec<C64>,
    dz: Vec<C64>,
    measure: Vec<f64>,
}

fn rule(seg: &Subsegment, anchor: Option<C64>, order: usize) -> Rule {
    let (x, w) = gauss_legendre(order);
    let half = 0.5 * (seg.end - seg.start);
    let nodes: Vec<C64> = x.iter().map(|&u| seg.point(u)).collect();
    let dz: Vec<C64> = w.iter().map(|&wi| half * wi).collect();
    let measure = nodes
        .iter()
        .zip(&dz)
        .map(|(&z, d)| match anchor {
            Some(a) => d.norm() / (a - z).norm(),
            None => d.norm(),
        })
        .collect();
    Rule { nodes, dz, measure }
}

fn horner(coeffs: &[C64], t: C64) -> C64 {
    coeffs.iter().rev().fold(C64::new(0.0, 0.0), |acc, &c| acc * t + c)
}

fn inner(a: &[C64], b: &[C64], measure: &[f64]) -> C64 {
    a.iter().zip(b).zip(measure).map(|((x, y), w)| x * y.conj() * w).sum()
}

impl BasisEntry {
    /// Modified Gram–Schmidt with one reorthogonalization pass on the shifted
    /// monomials `t^p`, `t = (z - center)/s_k`.
    pub fn build(seg: &Subsegment, anchor: Option<C64>, p_max: usize, order: usize) -> Result<Self> {
        if p_max > 30 {
            return Err(Error::Precondition(format!("p_max = {p_max} exceeds 30")));
        }
        let order = order.max(2 * p_max + 8);
        let scale = seg.disc_radius;
        let Rule { nodes, dz, measure } = rule(seg, anchor, order);
        let ts: Vec<C64> = nodes.iter().map(|&z| (z - seg.center) / scale).collect();
        let mass: f64 = measure.iter().sum();
        let mut coefficients: Vec<Vec<C64>> = Vec::with_capacity(p_max + 1);
        let mut vals: Vec<Vec<C64>> = Vec::with_capacity(p_max + 1);
        for p in 0..=p_max {
            let mut c = vec![C64::new(0.0, 0.0); p + 1];
            c[p] = C64::new(1.0, 0.0);
            let mut v: Vec<C64> = ts.iter().map(|t| t.powu(p as u32)).collect();
            for _ in 0..2 {
                for q in 0..p {
                    let proj = inner(&v, &vals[q], &measure);
                    for (vi, eq) in v.iter_mut().zip(&vals[q]) {
                        *vi -= proj * eq;
                    }
                    for (ci, cq) in c.iter_mut().zip(&coefficients[q]) {
                        *ci -= proj * cq;
                    }
                }
            }
            let norm = inner(&v, &v, &measure).re.sqrt();
            if !(norm > 0.0) {
                return Err(Error::Conditioning { residual: f64::INFINITY });
            }
            for x in v.iter_mut().chain(c.iter_mut()) {
                *x /= norm;
            }
            // values are recomputed from the stored coefficients
            vals.push(ts.iter().map(|&t| horner(&c, t)).collect());
            coefficients.push(c);
        }
        let mut entry = Self {
            index: seg.index,
            center: seg.center,
            scale,
            coefficients,
            mass,
            gram_residual: 0.0,
            anchor,
            nodes,
            dz,
            measure,
            values: vals,
        };
        entry.gram_residual = gram_residual(&entry.values, &entry.measure);
        if entry.gram_residual > 1e-6 {
            return Err(Error::Conditioning { residual: entry.gram_residual });
        }
        Ok(entry)
    }

    pub fn degree(&self) -> usize {
        self.coefficients.len() - 1
    }

    /// `e_p(z)` from the stored coefficients.
    pub fn eval(&self, p: usize, z: C64) -> C64 {
        horner(&self.coefficients[p], (z - self.center) / self.scale)
    }

    pub fn nodes(&self) -> &[C64] {
        &self.nodes
    }

    pub fn dz(&self) -> &[C64] {
        &self.dz
    }

    pub fn measure(&self) -> &[f64] {
        &self.measure
    }

    /// `e_p` at the rule nodes.
    pub fn values(&self, p: usize) -> &[C64] {
        &self.values[p]
    }

    pub fn anchor(&self) -> Option<C64> {
        self.anchor
    }

    /// Gram residual of the stored polynomials under an independent Gauss
    /// rule of the given order.
    pub fn gram_residual_at(&self, seg: &Subsegment, order: usize) -> f64 {
        let Rule { nodes, measure, .. } = rule(seg, self.anchor, order);
        let vals: Vec<Vec<C64>> = (0..=self.degree())
            .map(|p| nodes.iter().map(|&z| self.eval(p, z)).collect())
            .collect();
        gram_residual(&vals, &measure)
    }
}

fn gram_residual(vals: &[Vec<C64>], measure: &[f64]) -> f64 {
    let mut worst: f64 = 0.0;
    for (p, a) in vals.iter().enumerate() {
        for (q, b) in vals.iter().enumerate() {
            let target = if p == q { 1.0 } else { 0.0 };
            worst = worst.max((inner(a, b, measure) - target).norm());
        }
    }
    worst
}

/// Orthonormal bases for every stored subsegment of a contour.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FMBasis {
    entries: Vec<BasisEntry>,
    p_max: usize,
    gram_residual: f64,
}

impl FMBasis {
    pub fn entries(&self) -> &[BasisEntry] {
        &self.entries
    }

    pub fn entry(&self, index: PieceIndex) -> Option<&BasisEntry> {
        self.entries.iter().find(|e| e.index == index)
    }

    pub fn p_max(&self) -> usize {
        self.p_max
    }

    /// Worst Gram residual over all entries.
    pub fn gram_residual(&self) -> f64 {
        self.gram_residual
    }
}

/// Basis for the single subsegment `index`.
pub fn orthonormal_basis(contour: &FMContour, index: PieceIndex, p_max: usize) -> Result<BasisEntry> {
    let seg = contour
        .subsegment(index)
        .ok_or_else(|| Error::Precondition(format!("no subsegment {index:?}")))?;
    let anchor = seg.anchor.map(|a| contour.vertices().vertex(a));
    BasisEntry::build(seg, anchor, p_max, 2 * p_max + 8)
}

/// Bases for all subsegments (in the contour's order), built in parallel.
pub fn build_basis(contour: &FMContour, p_max: usize) -> Result<FMBasis> {
    let entries = contour
        .subsegments()
        .par_iter()
        .map(|seg| orthonormal_basis(contour, seg.index, p_max))
        .collect::<Result<Vec<_>>>()?;
    let gram_residual = entries.iter().map(|e| e.gram_residual).fold(0.0, f64::max);
    Ok(FMBasis {
        entries,
        p_max,
        gram_residual,
    })
}
