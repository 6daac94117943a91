//! Seeded random streams.
//!
//! A run derives independent ChaCha8 streams from one 64-bit seed so that,
//! for instance, the Gaussian directions drawn by two solvers coincide even
//! when their batch sampling consumes different amounts of randomness.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

pub const DIRECTIONS: u64 = 0;
pub const BATCHES: u64 = 1;
pub const DIAGNOSTICS: u64 = 2;
/// Data splits, subsampling and synthetic data.
pub const DATA: u64 = 3;
/// Random starting points.
pub const INIT: u64 = 4;

pub fn stream(seed: u64, id: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(id);
    rng
}

/// `dim` independent `N(0, scale²)` values from the [`INIT`] stream.
pub fn normal_start(seed: u64, dim: usize, scale: f64) -> Vec<f64> {
    let mut g = stream(seed, INIT);
    (0..dim).map(|_| scale * g.sample::<f64, _>(StandardNormal)).collect()
}
