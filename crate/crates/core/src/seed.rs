//! Seed derivation and random number generators.
//!
//! Every replication of every experiment draws from its own ChaCha8 stream,
//! seeded by [`derive_seed`]. The mixing function is part of the output
//! contract: changing it changes every raw CSV the crate writes.
//!
//! ```text
//! derive_seed(base, i) = splitmix64(base + GOLDEN_GAMMA * (i + 1))   (wrapping)
//! splitmix64(z):
//!     z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9
//!     z = (z ^ (z >> 27)) * 0x94D049BB133111EB
//!     z ^ (z >> 31)
//! ```

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub const GOLDEN_GAMMA: u64 = 0x9E37_79B9_7F4A_7C15;

pub type LabRng = ChaCha8Rng;

#[inline]
pub fn splitmix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed for replication `index` of a run with base seed `base`.
#[inline]
pub fn derive_seed(base: u64, index: u64) -> u64 {
    splitmix64(base.wrapping_add(GOLDEN_GAMMA.wrapping_mul(index.wrapping_add(1))))
}

pub fn rng_from_seed(seed: u64) -> LabRng {
    ChaCha8Rng::seed_from_u64(seed)
}
