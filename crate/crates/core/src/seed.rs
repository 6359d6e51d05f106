//! Counter-based seed derivation.
//!
//! Every random stream in the crate is a `ChaCha8Rng` seeded from a `u64`.
//! Child seeds are derived from a parent seed and a small tuple of counters
//! with SplitMix64 finalization, so sibling streams never depend on how many
//! draws another stream consumed.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type SeededRng = ChaCha8Rng;

pub fn rng_from_seed(seed: u64) -> SeededRng {
    ChaCha8Rng::seed_from_u64(seed)
}

#[inline]
pub fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Mixes `parts` into `seed` one word at a time.
pub fn derive_seed(seed: u64, parts: &[u64]) -> u64 {
    parts
        .iter()
        .fold(splitmix64(seed), |acc, &p| splitmix64(acc ^ splitmix64(p)))
}

/// Stream tags keep differently-purposed streams from the same seed apart.
pub mod stream {
    pub const INSTANCE: u64 = 1;
    pub const PLANNER: u64 = 2;
    pub const BUFFER_PROBE: u64 = 3;
    pub const EXECUTOR: u64 = 4;
    pub const NOISE: u64 = 5;
}
