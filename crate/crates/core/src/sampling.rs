//! Seeded sampling helpers.
//!
//! All randomized checks in this crate draw from ChaCha8 streams so that a
//! 64-bit seed reproduces every instance bit-for-bit on any platform.

use num_complex::Complex64;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::cyclic::{CyclicGroup, GroupFunction};
use crate::system::SystemFunction;

/// The pinned generator for all seeded experiments.
pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Derives an independent stream for a named sub-experiment.
pub fn stream(seed: u64, index: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed ^ index.wrapping_mul(0x9E37_79B9_7F4A_7C15))
}

/// Complex number with both parts uniform in `[-1, 1]` (modulus up to sqrt 2).
pub fn complex_box(rng: &mut ChaCha8Rng) -> Complex64 {
    Complex64::new(rng.random_range(-1.0..=1.0), rng.random_range(-1.0..=1.0))
}

/// Uniform on the closed unit disk, so `|z| <= 1` always holds.
pub fn unit_disk(rng: &mut ChaCha8Rng) -> Complex64 {
    let r = rng.random_range(0.0..=1.0f64).sqrt();
    let theta = rng.random_range(0.0..std::f64::consts::TAU);
    Complex64::new(r * theta.cos(), r * theta.sin())
}

/// Function with values in the square `[-1,1]^2`.
pub fn random_function(rng: &mut ChaCha8Rng, group: CyclicGroup) -> GroupFunction {
    let values = (0..group.order()).map(|_| complex_box(rng)).collect();
    GroupFunction::new(group, values).expect("sampled values are finite")
}

/// Function bounded by 1 in modulus.
pub fn bounded_function(rng: &mut ChaCha8Rng, group: CyclicGroup) -> GroupFunction {
    let values = (0..group.order()).map(|_| unit_disk(rng)).collect();
    GroupFunction::new(group, values).expect("sampled values are finite")
}

/// Random `+-1`-valued real function.
pub fn pm_one_function(rng: &mut ChaCha8Rng, group: CyclicGroup) -> GroupFunction {
    let values = (0..group.order())
        .map(|_| {
            if rng.random_bool(0.5) {
                Complex64::ONE
            } else {
                -Complex64::ONE
            }
        })
        .collect();
    GroupFunction::new(group, values).expect("values are finite")
}

/// System function bounded by 1 in modulus.
pub fn bounded_system_function(rng: &mut ChaCha8Rng, size: usize) -> SystemFunction {
    SystemFunction::new((0..size).map(|_| unit_disk(rng)).collect())
        .expect("sampled values are finite")
}

/// System function with values in the square `[-1,1]^2`.
pub fn random_system_function(rng: &mut ChaCha8Rng, size: usize) -> SystemFunction {
    SystemFunction::new((0..size).map(|_| complex_box(rng)).collect())
        .expect("sampled values are finite")
}

/// Random subset of `0..n`, each element kept with probability `density`.
/// Never returns the empty set for `density > 0`: one point is forced in.
pub fn random_subset(rng: &mut ChaCha8Rng, n: usize, density: f64) -> Vec<usize> {
    let mut set: Vec<usize> = (0..n).filter(|_| rng.random_bool(density)).collect();
    if set.is_empty() && n > 0 {
        set.push(rng.random_range(0..n));
    }
    set
}
