use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::linalg::{self, CMat, CVec};
use crate::rademacher::{
    enumerate_signs, rad_norm, sample_signs, RadEstimate, RadMethod, RadRequest, RadSettings,
    VectorFamily, ENUMERATION_LIMIT,
};
use crate::random::{random_complex_vector, substream};
use crate::C64;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RBoundSettings {
    pub trials: usize,
    pub family_size: usize,
    pub rad: RadSettings,
}

impl Default for RBoundSettings {
    fn default() -> Self {
        Self {
            trials: 64,
            family_size: 4,
            rad: RadSettings::default(),
        }
    }
}

fn unit_vector<R: Rng>(rng: &mut R, n: usize, p: f64) -> CVec {
    let v = random_complex_vector(rng, n);
    let norm = linalg::vector_norm(&v, p);
    v / C64::new(norm, 0.0)
}

/// Norm-attaining vector of `m` on `l^p` (right singular vector at `p = 2`,
/// best unit coordinate vector otherwise).
fn norming_vector(m: &CMat, p: f64) -> CVec {
    let n = m.ncols();
    let mut best = (CVec::zeros(n), -1.0);
    if p == 2.0 {
        let svd = m.clone().svd(false, true);
        let v_t = svd.v_t.expect("requested");
        let (i, _) = svd
            .singular_values
            .iter()
            .enumerate()
            .fold((0, -1.0), |acc, (i, &s)| if s > acc.1 { (i, s) } else { acc });
        return v_t.row(i).adjoint();
    }
    for i in 0..n {
        let mut e = CVec::zeros(n);
        e[i] = linalg::one();
        let v = linalg::vector_norm(&(m * &e), p);
        if v > best.1 {
            best = (e, v);
        }
    }
    best.0
}

/// Ratio `Rad(T_σ(k) x_k) / Rad(x_k)` with both averages over the same
/// sign patterns, so a family of identical isometries gives exactly 1.
fn ratio(ops: &[CMat], sigma: &[usize], xs: &[CVec], p: f64, settings: &RadSettings) -> RadEstimate {
    let images: Vec<CVec> = sigma.iter().zip(xs).map(|(&s, x)| &ops[s] * x).collect();
    let num = VectorFamily::new(images, p).expect("nonempty");
    let den = VectorFamily::new(xs.to_vec(), p).expect("nonempty");
    let a = rad_norm(&num, settings);
    let b = rad_norm(&den, settings);
    if b.value == 0.0 {
        return RadEstimate::exact(0.0, a.method, a.samples);
    }
    let value = a.value / b.value;
    let rel = ((a.std_error / a.value.max(f64::MIN_POSITIVE)).powi(2) + (b.std_error / b.value).powi(2)).sqrt();
    RadEstimate {
        value,
        std_error: value * rel,
        method: a.method,
        samples: a.samples + b.samples,
    }
}

/// Empirical lower bound for the R-bound of `{T_1, …, T_m}` on `l^p`: the
/// best ratio over single-operator norming trials and `trials` random
/// selections (with repetition) of `family_size` operators applied to
/// random unit vectors.
pub fn r_bound_estimate(ops: &[CMat], p: f64, settings: &RBoundSettings) -> RadEstimate {
    assert!(!ops.is_empty(), "operator family must be nonempty");
    let n = ops[0].ncols();
    let mut best: Option<RadEstimate> = None;
    let mut consider = |r: RadEstimate| {
        if best.map_or(true, |b| r.value > b.value) {
            best = Some(r);
        }
    };
    for (i, m) in ops.iter().enumerate() {
        let x = norming_vector(m, p);
        consider(ratio(ops, &[i], &[x], p, &settings.rad));
    }
    for t in 0..settings.trials {
        let mut rng = substream(settings.rad.seed ^ 0x7262_6464, t as u64);
        let k = settings.family_size.max(1);
        let sigma: Vec<usize> = (0..k).map(|_| rng.gen_range(0..ops.len())).collect();
        let xs: Vec<CVec> = (0..k).map(|_| unit_vector(&mut rng, n, p)).collect();
        consider(ratio(ops, &sigma, &xs, p, &settings.rad));
    }
    best.expect("at least one trial")
}

/// Ratio of the doubly indexed Rademacher norm of `Σ α_{kl} ε_k ε'_l x_k`
/// to `sup_k (Σ_l |α_{kl}|²)^{1/2} · Rad(x_k)`.
pub fn kaiser_weis_ratio(alpha: &CMat, family: &VectorFamily, settings: &RadSettings) -> RadEstimate {
    let (k, l) = alpha.shape();
    assert_eq!(k, family.len(), "alpha rows must match the family size");
    let p = family.ambient_p();
    let row_sup = (0..k)
        .map(|i| alpha.row(i).iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt())
        .fold(0.0, f64::max);
    let xs = family.members();
    let den = rad_norm(family, settings);
    if row_sup == 0.0 || den.value == 0.0 {
        return RadEstimate::exact(0.0, den.method, 0);
    }
    let num = if p == 2.0 && settings.request == RadRequest::Auto {
        // E‖Σ_k ε_k a_k(ε') x_k‖² = Σ_k ‖x_k‖² Σ_l |α_kl|²
        let s: f64 = (0..k)
            .map(|i| xs[i].norm_squared() * alpha.row(i).iter().map(|a| a.norm_sqr()).sum::<f64>())
            .sum();
        RadEstimate::exact(s.sqrt(), RadMethod::HilbertExact, 0)
    } else {
        let f = |signs: &[f64]| {
            let (eps, eps2) = signs.split_at(k);
            let v = (0..k).fold(CVec::zeros(family.dim()), |acc, i| {
                let a: C64 = (0..l).map(|j| alpha[(i, j)] * eps2[j]).sum();
                acc + &xs[i] * (a * eps[i])
            });
            linalg::vector_norm(&v, p).powi(2)
        };
        if settings.request != RadRequest::MonteCarlo && k + l <= ENUMERATION_LIMIT {
            RadEstimate::exact(enumerate_signs(k + l, f).sqrt(), RadMethod::Enumeration, 1 << (k + l))
        } else {
            let (value, std_error) = sample_signs(k + l, settings.samples.max(2), settings.seed, f).root_estimate();
            RadEstimate {
                value,
                std_error,
                method: RadMethod::MonteCarlo,
                samples: settings.samples.max(2),
            }
        }
    };
    let value = num.value / (row_sup * den.value);
    let rel = ((num.std_error / num.value.max(f64::MIN_POSITIVE)).powi(2) + (den.std_error / den.value).powi(2)).sqrt();
    RadEstimate {
        value,
        std_error: value * rel,
        method: num.method,
        samples: num.samples + den.samples,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{diag, identity};
    use crate::random::rng;
    use approx::assert_abs_diff_eq;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn identity_and_scalar_families() {
        for p in [1.0, 2.0, 3.0, f64::INFINITY] {
            let est = r_bound_estimate(&[identity(3)], p, &RBoundSettings::default());
            assert!((est.value - 1.0).abs() <= 3.0 * est.std_error + 1e-12, "p={p}");
            let cmat = identity(3) * c(0.0, -2.5);
            let est = r_bound_estimate(&[cmat], p, &RBoundSettings::default());
            assert!((est.value - 2.5).abs() <= 3.0 * est.std_error + 1e-12);
        }
    }

    #[test]
    fn coordinate_projections_in_hilbert_space() {
        let ops = [diag(&[c(1.0, 0.0), c(0.0, 0.0)]), diag(&[c(0.0, 0.0), c(1.0, 0.0)])];
        let est = r_bound_estimate(&ops, 2.0, &RBoundSettings::default());
        assert!(est.value >= 1.0 - 1e-12);
        assert!(est.value <= 2f64.sqrt() + 1e-12);
    }

    #[test]
    fn kaiser_weis_examples() {
        let mut g = rng(2);
        let xs: Vec<CVec> = (0..3).map(|_| random_complex_vector(&mut g, 2)).collect();
        let enumerate = RadSettings {
            request: RadRequest::Enumeration,
            ..RadSettings::default()
        };
        let mut alpha = CMat::zeros(3, 4);
        for i in 0..3 {
            alpha[(i, 0)] = linalg::one();
        }
        for p in [1.0, f64::INFINITY] {
            let fam = VectorFamily::new(xs.clone(), p).unwrap();
            let r = kaiser_weis_ratio(&alpha, &fam, &enumerate);
            assert_abs_diff_eq!(r.value, 1.0, epsilon = 1e-12);
        }
        let mut g = rng(3);
        let dense = CMat::from_fn(3, 4, |_, _| crate::random::complex_normal(&mut g));
        let hil = VectorFamily::new(xs.clone(), 2.0).unwrap();
        let r = kaiser_weis_ratio(&dense, &hil, &RadSettings::default());
        assert!(r.value <= 1.0 + 1e-12);
        let fam = VectorFamily::new(xs, 1.0).unwrap();
        let a = kaiser_weis_ratio(&dense, &fam, &enumerate);
        let b = kaiser_weis_ratio(&(dense * c(3.0, -1.0)), &fam, &enumerate);
        assert_abs_diff_eq!(a.value, b.value, epsilon = 1e-12);
    }
}
