//! Seed derivation.
//!
//! Every stochastic concern (placement, mobility, fading) draws from its own
//! stream. Streams are derived from the master seed with a SplitMix64-style
//! finalizer so that adding draws to one concern never perturbs another.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Independent random concerns of a run.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
#[repr(u64)]
pub enum Stream {
    Placement = 1,
    Mobility = 2,
    Fading = 3,
    Categories = 4,
}

/// SplitMix64 output function.
pub fn mix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Combines a seed with further keys into one well-mixed value.
pub fn derive(seed: u64, keys: &[u64]) -> u64 {
    keys.iter().fold(mix64(seed), |acc, &k| mix64(acc ^ mix64(k)))
}

pub fn sub_seed(master: u64, stream: Stream) -> u64 {
    derive(master, &[stream as u64])
}

pub fn stream_rng(master: u64, stream: Stream, keys: &[u64]) -> ChaCha8Rng {
    let mut all = vec![stream as u64];
    all.extend_from_slice(keys);
    ChaCha8Rng::seed_from_u64(derive(master, &all))
}

/// Uniform draw in the open interval (0, 1) from a hashed key.
pub fn unit_open(key: u64) -> f64 {
    // 52 random bits, offset by half a step so neither end is reachable.
    ((key >> 12) as f64 + 0.5) / (1u64 << 52) as f64
}
