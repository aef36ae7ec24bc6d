//! Seed derivation.
//!
//! Every random stream in the crate is a ChaCha8 generator seeded from a
//! 64-bit value derived with [`derive_seed`], so a master seed fully
//! determines every repetition and generation attempt independently of
//! thread scheduling.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

const GOLDEN_GAMMA: u64 = 0x9E37_79B9_7F4A_7C15;

/// SplitMix64 finalizer applied to `master ^ (GOLDEN_GAMMA * (index + 1))`.
pub fn derive_seed(master: u64, index: u64) -> u64 {
    let mut z = master ^ GOLDEN_GAMMA.wrapping_mul(index.wrapping_add(1));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

pub fn stream(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Stream for the `index`-th child of `master`.
pub fn child_stream(master: u64, index: u64) -> ChaCha8Rng {
    stream(derive_seed(master, index))
}
