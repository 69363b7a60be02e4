//! Deterministic random streams.
//!
//! Every consumer of randomness gets its own ChaCha stream whose seed is a
//! SplitMix64 hash of a parent seed and a short path of integers, e.g.
//! `(run_seed, generation, slot, attempt)`. Two runs with the same master
//! seed therefore draw identical numbers regardless of thread scheduling.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub type Stream = ChaCha8Rng;

const GOLDEN: u64 = 0x9E37_79B9_7F4A_7C15;

/// One SplitMix64 output step.
pub fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(GOLDEN);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Hash a parent seed and a path of integers into a child seed.
pub fn derive_seed(parent: u64, path: &[u64]) -> u64 {
    path.iter().fold(splitmix64(parent), |acc, &p| splitmix64(acc ^ splitmix64(p.wrapping_add(GOLDEN))))
}

pub fn stream(seed: u64) -> Stream {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn substream(parent: u64, path: &[u64]) -> Stream {
    stream(derive_seed(parent, path))
}

/// Uniform draw on the half-open interval (0, 1].
pub fn unit_open_closed<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    1.0 - rng.random::<f64>()
}
