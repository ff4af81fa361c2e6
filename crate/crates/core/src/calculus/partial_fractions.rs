//! Coefficients of `1 / Π_j (1 - conj(ξ_j) z)^M` by decomposition into
//! simple elements, independent of the recurrence in `series`.
//!
//! With `w = 1 - conj(ξ_j) z`,
//! `1/Π_d (1 - conj(ξ_d) z)^M = w^{-M} g_j(w)` where
//! `g_j(w) = Π_{d≠j} (1 - conj(ξ_d) ξ_j (1 - w))^{-M}`, so the coefficient of
//! `(1 - conj(ξ_j) z)^{-(M - i)}` is `[w^i] g_j`. Each simple element
//! contributes `binom(k + p - 1, p - 1) conj(ξ_j)^k` to `z^k`.

use crate::geometry::UnimodularVertexSet;
use crate::C64;

/// Taylor coefficients of `(a + b w)^{-m}` up to `w^{n-1}`.
fn negative_power_series(a: C64, b: C64, m: usize, n: usize) -> Vec<C64> {
    let ratio = b / a;
    let lead = a.powi(-(m as i32));
    let mut out = Vec::with_capacity(n);
    let mut binom = 1.0; // binom(-m, i)
    let mut power = C64::new(1.0, 0.0);
    for i in 0..n {
        out.push(lead * power * binom);
        binom *= -((m + i) as f64) / (i + 1) as f64;
        power *= ratio;
    }
    out
}

fn convolve(a: &[C64], b: &[C64], n: usize) -> Vec<C64> {
    (0..n)
        .map(|k| (0..=k).map(|i| a[i] * b[k - i]).sum())
        .collect()
}

/// Simple-element weights `a[p-1][j]` of `(1 - conj(ξ_j) z)^{-p}`.
pub fn simple_elements(vertices: &UnimodularVertexSet, m: usize) -> Vec<Vec<C64>> {
    let xs = vertices.vertices();
    let mut weights = vec![vec![C64::new(0.0, 0.0); xs.len()]; m];
    for (j, &xj) in xs.iter().enumerate() {
        let mut g = vec![C64::new(0.0, 0.0); m];
        g[0] = C64::new(1.0, 0.0);
        for (d, &xd) in xs.iter().enumerate() {
            if d == j {
                continue;
            }
            let b = xd.conj() * xj;
            g = convolve(&g, &negative_power_series(1.0 - b, b, m, m), m);
        }
        for i in 0..m {
            weights[m - i - 1][j] = g[i];
        }
    }
    weights
}

/// `c_0..c_{k_max}` from the simple-element expansion.
pub fn coefficients(vertices: &UnimodularVertexSet, m: usize, k_max: usize) -> Vec<C64> {
    let xs = vertices.vertices();
    let weights = simple_elements(vertices, m);
    (0..=k_max)
        .map(|k| {
            let mut total = C64::new(0.0, 0.0);
            for p in 1..=m {
                // binom(k + p - 1, p - 1)
                let mut binom = 1.0;
                for i in 1..p {
                    binom *= (k + i) as f64 / i as f64;
                }
                for (j, &x) in xs.iter().enumerate() {
                    total += weights[p - 1][j] * binom * x.conj().powu(k as u32);
                }
            }
            total
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_vertex_is_a_pure_power() {
        let e = UnimodularVertexSet::roots_of_unity(1);
        let w = simple_elements(&e, 3);
        assert_eq!(w[2][0], C64::new(1.0, 0.0));
        assert_eq!(w[0][0], C64::new(0.0, 0.0));
        let c = coefficients(&e, 3, 5);
        assert!((c[5] - 21.0).norm() < 1e-12);
    }

    #[test]
    fn two_vertices_simple_case() {
        // 1/((1-z)(1+z)) = (1/2)/(1-z) + (1/2)/(1+z)
        let e = UnimodularVertexSet::roots_of_unity(2);
        let w = simple_elements(&e, 1);
        assert!((w[0][0] - 0.5).norm() < 1e-15);
        assert!((w[0][1] - 0.5).norm() < 1e-15);
    }
}
