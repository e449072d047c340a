//! Seed derivation for reproducible, order-independent randomized trials.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Seed of trial `t` under master seed `seed` (a splitmix64 step).
pub fn trial_seed(seed: u64, t: u64) -> u64 {
    let mut z = seed
        ^ t.wrapping_mul(0x9E37_79B9_7F4A_7C15)
            .wrapping_add(0xD1B5_4A32_D192_ED03);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

pub fn rng_from(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}
