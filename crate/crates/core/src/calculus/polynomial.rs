use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::UnimodularVertexSet;
use crate::linalg::{self, CMat};
use crate::operator::FiniteOperator;
use crate::C64;

/// Polynomial with complex coefficients in ascending degree; trailing zeros
/// are stripped so the zero polynomial has no coefficients.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<[f64; 2]>", into = "Vec<[f64; 2]>")]
pub struct Polynomial {
    coefficients: Vec<C64>,
}

impl Polynomial {
    pub fn new(mut coefficients: Vec<C64>) -> Self {
        while coefficients.last().is_some_and(|c| *c == linalg::zero()) {
            coefficients.pop();
        }
        Self { coefficients }
    }

    pub fn from_real(coefficients: &[f64]) -> Self {
        Self::new(coefficients.iter().map(|&c| C64::new(c, 0.0)).collect())
    }

    pub fn constant(c: C64) -> Self {
        Self::new(vec![c])
    }

    /// `z^k`.
    pub fn monomial(k: usize) -> Self {
        let mut c = vec![linalg::zero(); k + 1];
        c[k] = linalg::one();
        Self::new(c)
    }

    /// `Π_j (1 - conj(ξ_j) z)^m`.
    pub fn vertex_power(vertices: &UnimodularVertexSet, m: usize) -> Self {
        let mut p = Self::constant(linalg::one());
        for &x in vertices.vertices() {
            let factor = Self::new(vec![linalg::one(), -x.conj()]);
            for _ in 0..m {
                p = p.mul(&factor);
            }
        }
        p
    }

    pub fn coefficients(&self) -> &[C64] {
        &self.coefficients
    }

    /// Degree, `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.coefficients.len().checked_sub(1)
    }

    pub fn is_zero(&self) -> bool {
        self.coefficients.is_empty()
    }

    pub fn eval(&self, z: C64) -> C64 {
        self.coefficients
            .iter()
            .rev()
            .fold(linalg::zero(), |acc, &c| acc * z + c)
    }

    /// Horner evaluation at a matrix.
    pub fn eval_matrix(&self, m: &CMat) -> CMat {
        let n = m.nrows();
        self.coefficients
            .iter()
            .rev()
            .fold(CMat::zeros(n, n), |acc, &c| acc * m + linalg::identity(n) * c)
    }

    pub fn mul(&self, other: &Self) -> Self {
        if self.is_zero() || other.is_zero() {
            return Self::new(Vec::new());
        }
        let mut out = vec![linalg::zero(); self.coefficients.len() + other.coefficients.len() - 1];
        for (i, a) in self.coefficients.iter().enumerate() {
            for (j, b) in other.coefficients.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        Self::new(out)
    }

    pub fn add(&self, other: &Self) -> Self {
        let n = self.coefficients.len().max(other.coefficients.len());
        let get = |p: &Self, i: usize| p.coefficients.get(i).copied().unwrap_or_default();
        Self::new((0..n).map(|i| get(self, i) + get(other, i)).collect())
    }

    pub fn scale(&self, c: C64) -> Self {
        Self::new(self.coefficients.iter().map(|a| a * c).collect())
    }

    /// Long division; returns `(quotient, remainder)`.
    pub fn div_rem(&self, divisor: &Self) -> Result<(Self, Self)> {
        let d = divisor.degree().ok_or(Error::Precondition("division by zero polynomial".into()))?;
        let lead = divisor.coefficients[d];
        let mut rem = self.coefficients.clone();
        if rem.len() <= d {
            return Ok((Self::new(Vec::new()), self.clone()));
        }
        let mut quot = vec![linalg::zero(); rem.len() - d];
        for k in (0..quot.len()).rev() {
            let q = rem[k + d] / lead;
            quot[k] = q;
            for (i, &c) in divisor.coefficients.iter().enumerate() {
                rem[k + i] -= q * c;
            }
        }
        rem.truncate(d);
        Ok((Self::new(quot), Self::new(rem)))
    }

    /// Exact quotient by `divisor`; fails when the remainder is not
    /// negligible relative to the dividend.
    pub fn divide_exact(&self, divisor: &Self) -> Result<Self> {
        let (q, r) = self.div_rem(divisor)?;
        let scale = self.coefficients.iter().map(|c| c.norm()).fold(1.0, f64::max);
        let remainder = r.coefficients.iter().map(|c| c.norm()).fold(0.0, f64::max);
        if remainder > 1e-10 * scale {
            return Err(Error::NotDivisible { remainder });
        }
        Ok(q)
    }
}

impl TryFrom<Vec<[f64; 2]>> for Polynomial {
    type Error = Error;
    fn try_from(raw: Vec<[f64; 2]>) -> Result<Self> {
        if raw.iter().flatten().any(|v| !v.is_finite()) {
            return Err(Error::Parse("polynomial coefficients must be finite".into()));
        }
        Ok(Self::new(raw.into_iter().map(|[a, b]| C64::new(a, b)).collect()))
    }
}

impl From<Polynomial> for Vec<[f64; 2]> {
    fn from(p: Polynomial) -> Self {
        p.coefficients.iter().map(|c| [c.re, c.im]).collect()
    }
}

/// `P(T)` by Horner's scheme.
pub fn eval_polynomial_on_operator(p: &Polynomial, op: &FiniteOperator) -> CMat {
    p.eval_matrix(op.entries())
}
