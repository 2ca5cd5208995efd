//! Seeded random sources.
//!
//! Every stochastic routine takes its generator explicitly. Sub-streams (per
//! start node, per epoch, per sweep cell) are derived by mixing a base seed
//! with integer tags so results do not depend on scheduling order.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type SenseRng = ChaCha8Rng;

pub fn seeded(seed: u64) -> SenseRng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// splitmix64 finalizer.
fn mix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

pub fn derive_seed(seed: u64, tags: &[u64]) -> u64 {
    tags.iter().fold(mix(seed), |acc, &t| mix(acc ^ mix(t)))
}

pub fn derived(seed: u64, tags: &[u64]) -> SenseRng {
    seeded(derive_seed(seed, tags))
}
