//! Seeded sampling helpers.

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand::SeedableRng;
use rand_distr::StandardNormal;

use crate::linalg::CVec;
use crate::C64;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Independent stream `index` derived from `seed`.
pub fn substream(seed: u64, index: u64) -> ChaCha8Rng {
    let mut r = ChaCha8Rng::seed_from_u64(seed);
    r.set_stream(index);
    r
}

pub fn complex_normal<R: Rng + ?Sized>(rng: &mut R) -> C64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    C64::new(re, im) / std::f64::consts::SQRT_2
}

pub fn random_complex_vector<R: Rng + ?Sized>(rng: &mut R, n: usize) -> CVec {
    CVec::from_fn(n, |_, _| complex_normal(rng))
}

pub fn random_unit_complex<R: Rng + ?Sized>(rng: &mut R) -> C64 {
    C64::from_polar(1.0, rng.gen_range(0.0..std::f64::consts::TAU))
}

/// Uniform random sign.
pub fn sign<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    if rng.gen::<bool>() {
        1.0
    } else {
        -1.0
    }
}
