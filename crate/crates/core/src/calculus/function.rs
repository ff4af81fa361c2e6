use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::calculus::Polynomial;
use crate::error::{Error, Result};
use crate::geometry::{StolzDomain, UnimodularVertexSet};
use crate::linalg;
use crate::C64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FunctionKind {
    Polynomial,
    ClosedForm,
    Composite,
}

/// `|φ(λ)| ≤ constant · Π_j |ξ_j - λ|^{exponents[j]}` on `E_s`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecayCertificate {
    pub exponents: Vec<f64>,
    pub constant: f64,
}

/// A holomorphic function on `E_s`.
#[derive(Clone)]
pub struct HoloFunction {
    name: String,
    evaluate: Arc<dyn Fn(C64) -> C64 + Send + Sync>,
    s: f64,
    decay: Option<DecayCertificate>,
    kind: FunctionKind,
    polynomial: Option<Polynomial>,
}

impl fmt::Debug for HoloFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("HoloFunction")
            .field("name", &self.name)
            .field("s", &self.s)
            .field("decay", &self.decay)
            .field("kind", &self.kind)
            .finish()
    }
}

/// Named closed-form functions available from configuration.
///
/// | name | formula | parameters |
/// |------|---------|------------|
/// | `vertex_power` | `Π_j (1 - conj(ξ_j) z)^a` | `a > 0` |
/// | `exp_vertex` | `e^{b z} Π_j (1 - conj(ξ_j) z)` | `b` real |
/// | `cauchy_vertex` | `Π_j (1 - conj(ξ_j) z) / (c - z)` | `c > 1` real |
pub const CATALOG: [&str; 3] = ["vertex_power", "exp_vertex", "cauchy_vertex"];

impl HoloFunction {
    pub fn new<F>(name: impl Into<String>, s: f64, kind: FunctionKind, f: F) -> Self
    where
        F: Fn(C64) -> C64 + Send + Sync + 'static,
    {
        Self {
            name: name.into(),
            evaluate: Arc::new(f),
            s,
            decay: None,
            kind,
            polynomial: None,
        }
    }

    pub fn with_decay(mut self, decay: DecayCertificate) -> Self {
        self.decay = Some(decay);
        self
    }

    /// Polynomial function; its decay certificate is derived from the
    /// multiplicity of each vertex factor it contains.
    pub fn from_polynomial(p: Polynomial, vertices: &UnimodularVertexSet, s: f64) -> Self {
        let q = p.clone();
        let mut f = Self::new("polynomial", s, FunctionKind::Polynomial, move |z| q.eval(z));
        let mut exponents = Vec::with_capacity(vertices.len());
        let mut rest = p.clone();
        for &x in vertices.vertices() {
            let factor = Polynomial::new(vec![linalg::one(), -x.conj()]);
            let mut k = 0;
            while !rest.is_zero() {
                match rest.divide_exact(&factor) {
                    Ok(q) => {
                        rest = q;
                        k += 1;
                    }
                    Err(_) => break,
                }
            }
            exponents.push(k as f64);
        }
        if !p.is_zero() && exponents.iter().all(|&e| e > 0.0) {
            // |rest| ≤ Σ|coef| on the unit disc and |1 - conj(ξ)λ| = |ξ - λ|
            let constant = rest.coefficients().iter().map(|c| c.norm()).sum();
            f.decay = Some(DecayCertificate {
                exponents,
                constant,
            });
        }
        f.polynomial = Some(p);
        f
    }

    /// Catalog lookup; see [`CATALOG`].
    pub fn catalog(name: &str, param: f64, vertices: &UnimodularVertexSet, s: f64) -> Result<Self> {
        let e = vertices.clone();
        let n = vertices.len();
        match name {
            "vertex_power" => {
                if !(param > 0.0) {
                    return Err(Error::Domain {
                        name: "a",
                        value: param,
                        expected: "a > 0",
                    });
                }
                Ok(Self::new(name, s, FunctionKind::ClosedForm, move |z| {
                    e.vertices().iter().fold(linalg::one(), |acc, x| {
                        acc * linalg::principal_pow(1.0 - x.conj() * z, param)
                    })
                })
                .with_decay(DecayCertificate {
                    exponents: vec![param; n],
                    constant: 1.0,
                }))
            }
            "exp_vertex" => Ok(Self::new(name, s, FunctionKind::ClosedForm, move |z| {
                (z * param).exp() * e.vertex_product(z)
            })
            .with_decay(DecayCertificate {
                exponents: vec![1.0; n],
                constant: param.abs().exp(),
            })),
            "cauchy_vertex" => {
                if !(param > 1.0) {
                    return Err(Error::Domain {
                        name: "c",
                        value: param,
                        expected: "c > 1",
                    });
                }
                Ok(Self::new(name, s, FunctionKind::ClosedForm, move |z| {
                    e.vertex_product(z) / (param - z)
                })
                .with_decay(DecayCertificate {
                    exponents: vec![1.0; n],
                    constant: 1.0 / (param - 1.0),
                }))
            }
            other => Err(Error::Config {
                field: "function.name".into(),
                message: format!("unknown catalog function `{other}`; known: {}", CATALOG.join(", ")),
            }),
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn eval(&self, z: C64) -> C64 {
        (self.evaluate)(z)
    }

    pub fn s(&self) -> f64 {
        self.s
    }

    pub fn decay(&self) -> Option<&DecayCertificate> {
        self.decay.as_ref()
    }

    pub fn kind(&self) -> FunctionKind {
        self.kind
    }

    pub fn polynomial(&self) -> Option<&Polynomial> {
        self.polynomial.as_ref()
    }

    /// Pointwise product; decay exponents add.
    pub fn product(&self, other: &Self) -> Self {
        let (f, g) = (self.evaluate.clone(), other.evaluate.clone());
        let mut out = Self::new(
            format!("({})*({})", self.name, other.name),
            self.s.min(other.s),
            FunctionKind::Composite,
            move |z| f(z) * g(z),
        );
        out.decay = match (&self.decay, &other.decay) {
            (Some(a), Some(b)) if a.exponents.len() == b.exponents.len() => Some(DecayCertificate {
                exponents: a.exponents.iter().zip(&b.exponents).map(|(x, y)| x + y).collect(),
                constant: a.constant * b.constant,
            }),
            _ => None,
        };
        if let (Some(p), Some(q)) = (&self.polynomial, &other.polynomial) {
            out.polynomial = Some(p.mul(q));
            out.kind = FunctionKind::Polynomial;
        }
        out
    }

    /// `a φ + b ψ`; decay exponents take the componentwise minimum.
    pub fn linear_combination(a: C64, f: &Self, b: C64, g: &Self) -> Self {
        let (fe, ge) = (f.evaluate.clone(), g.evaluate.clone());
        let mut out = Self::new(
            format!("lin({},{})", f.name, g.name),
            f.s.min(g.s),
            FunctionKind::Composite,
            move |z| a * fe(z) + b * ge(z),
        );
        if let (Some(x), Some(y)) = (&f.decay, &g.decay) {
            if x.exponents.len() == y.exponents.len() {
                out.decay = Some(DecayCertificate {
                    exponents: x.exponents.iter().zip(&y.exponents).map(|(p, q)| p.min(*q)).collect(),
                    // |ξ - λ| ≤ 2 on the closed unit disc
                    constant: a.norm() * x.constant * 2f64.powf(max_gap(&x.exponents, &y.exponents))
                        + b.norm() * y.constant * 2f64.powf(max_gap(&y.exponents, &x.exponents)),
                });
            }
        }
        if let (Some(p), Some(q)) = (&f.polynomial, &g.polynomial) {
            out.polynomial = Some(p.scale(a).add(&q.scale(b)));
            out.kind = FunctionKind::Polynomial;
        }
        out
    }

    /// Largest `|φ(λ)| / (constant Π|ξ_j - λ|^{s_j})` over `points`; at most
    /// one when the certificate holds there.
    pub fn decay_violation(&self, vertices: &UnimodularVertexSet, points: &[C64]) -> Option<f64> {
        let d = self.decay.as_ref()?;
        Some(
            points
                .iter()
                .map(|&l| {
                    let bound = vertices
                        .vertices()
                        .iter()
                        .zip(&d.exponents)
                        .fold(d.constant, |acc, (x, e)| acc * (x - l).norm().powf(*e));
                    let v = self.eval(l).norm();
                    if v == 0.0 {
                        0.0
                    } else {
                        v / bound
                    }
                })
                .fold(0.0, f64::max),
        )
    }
}

fn max_gap(own: &[f64], other: &[f64]) -> f64 {
    own.iter()
        .zip(other)
        .map(|(a, b)| (a - a.min(*b)).max(0.0))
        .sum()
}

/// Deterministic interior test grid of roughly `count` points of `E_s`.
pub fn interior_grid(domain: &StolzDomain, count: usize) -> Vec<C64> {
    let side = ((count as f64).sqrt().ceil() as usize).max(2);
    let mut points = Vec::with_capacity(side * side);
    for a in 0..side {
        let phi = std::f64::consts::TAU * (a as f64 + 0.5) / side as f64;
        let b = domain.radial_boundary(phi);
        for i in 0..side {
            // squeeze toward the boundary so vertex regions are sampled
            let t = 1.0 - ((side - i) as f64 / side as f64).powi(3);
            let z = C64::from_polar(b * t * (1.0 - 1e-9), phi);
            if domain.contains(z) {
                points.push(z);
            }
        }
    }
    points
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn catalog_certificates_hold_on_grid() {
        for e in [
            UnimodularVertexSet::roots_of_unity(1),
            UnimodularVertexSet::roots_of_unity(2),
            UnimodularVertexSet::roots_of_unity(3),
        ] {
            let domain = StolzDomain::new(e.clone(), 0.9).unwrap();
            let grid = interior_grid(&domain, 1000);
            assert!(grid.len() > 500);
            for (name, param) in [("vertex_power", 0.5), ("exp_vertex", 0.7), ("cauchy_vertex", 1.5)] {
                let f = HoloFunction::catalog(name, param, &e, 0.9).unwrap();
                assert!(f.decay_violation(&e, &grid).unwrap() <= 1.0 + 1e-12, "{name}");
            }
        }
        let e = UnimodularVertexSet::roots_of_unity(1);
        assert!(HoloFunction::catalog("nope", 1.0, &e, 0.9).is_err());
        assert!(HoloFunction::catalog("vertex_power", 0.0, &e, 0.9).is_err());
    }

    #[test]
    fn polynomial_certificate_counts_vertex_multiplicity() {
        let e = UnimodularVertexSet::roots_of_unity(2);
        let p = Polynomial::vertex_power(&e, 2).mul(&Polynomial::from_real(&[0.5, 1.0]));
        let f = HoloFunction::from_polynomial(p, &e, 0.9);
        assert_eq!(f.decay().unwrap().exponents, vec![2.0, 2.0]);
        let domain = StolzDomain::new(e.clone(), 0.9).unwrap();
        assert!(f.decay_violation(&e, &interior_grid(&domain, 400)).unwrap() <= 1.0 + 1e-12);
        let plain = HoloFunction::from_polynomial(Polynomial::from_real(&[1.0, 1.0]), &e, 0.9);
        assert!(plain.decay().is_none());
    }

    #[test]
    fn combinations_evaluate_pointwise() {
        let e = UnimodularVertexSet::roots_of_unity(1);
        let f = HoloFunction::catalog("vertex_power", 1.0, &e, 0.9).unwrap();
        let g = HoloFunction::catalog("exp_vertex", 1.0, &e, 0.9).unwrap();
        let z = C64::new(0.3, -0.1);
        assert!((f.product(&g).eval(z) - f.eval(z) * g.eval(z)).norm() < 1e-15);
        let a = C64::new(2.0, 1.0);
        let b = C64::new(-1.0, 0.0);
        let h = HoloFunction::linear_combination(a, &f, b, &g);
        assert!((h.eval(z) - (a * f.eval(z) + b * g.eval(z))).norm() < 1e-15);
        let domain = StolzDomain::new(e.clone(), 0.9).unwrap();
        let grid = interior_grid(&domain, 300);
        assert!(f.product(&g).decay_violation(&e, &grid).unwrap() <= 1.0 + 1e-12);
        assert!(h.decay_violation(&e, &grid).unwrap() <= 1.0 + 1e-12);
    }
}
