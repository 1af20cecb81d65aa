//! Seeded random streams.
//!
//! All randomness comes from ChaCha20 (a counter-based generator) seeded from a
//! 64-bit integer. Collocation points and error-evaluation points use distinct
//! stream ids so the two samples are independent even for equal seeds.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;

pub const PRNG_NAME: &str = "ChaCha20 (rand_chacha), seed_from_u64";

/// Stream id of collocation points.
pub const COLLOCATION_STREAM: u64 = 0;
/// Stream id of Monte Carlo error-evaluation points.
pub const EVALUATION_STREAM: u64 = 1;
/// Stream id of synthetic test data (random matrices, coefficients).
pub const AUXILIARY_STREAM: u64 = 2;

pub fn stream(seed: u64, stream_id: u64) -> ChaCha20Rng {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    rng.set_stream(stream_id);
    rng
}

/// `count` points drawn uniformly from `[0,1)^dim`, row after row.
pub fn uniform_points(count: usize, dim: usize, seed: u64, stream_id: u64) -> Vec<Vec<f64>> {
    let mut rng = stream(seed, stream_id);
    (0..count)
        .map(|_| (0..dim).map(|_| rng.random::<f64>()).collect())
        .collect()
}

/// Derives the seed of one experiment cell from a base seed (splitmix64 mixing).
pub fn derive_seed(base: u64, m: usize, run: usize) -> u64 {
    let mut z = base
        .wrapping_add((m as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15))
        .wrapping_add((run as u64 + 1).wrapping_mul(0xD1B5_4A32_D192_ED03));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}
