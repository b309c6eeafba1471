//! Seedable randomness with documented stream splitting.
//!
//! All stochastic operations draw from [`EvoRng`], a ChaCha8 stream cipher
//! generator seeded from a single `u64`. Independent substreams (one per
//! evolution in a run, one per shard in a density estimate) are derived
//! with [`split_seed`], a SplitMix64 mix of the master seed and the stream
//! index. Work can therefore be distributed over any number of threads and
//! merged by index without changing a single output bit.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// The generator used everywhere in the crate.
pub type EvoRng = ChaCha8Rng;

/// SplitMix64 finalizer (Steele, Lea & Flood's mixing constants).
fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Derive the seed of the `index`-th child stream of `master`.
pub fn split_seed(master: u64, index: u64) -> u64 {
    splitmix64(master ^ splitmix64(index.wrapping_add(0xA076_1D64_78BD_642F)))
}

/// Build a generator from a 64-bit seed.
pub fn rng_from_seed(seed: u64) -> EvoRng {
    ChaCha8Rng::seed_from_u64(seed)
}
