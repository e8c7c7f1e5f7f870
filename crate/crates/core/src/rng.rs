//! Seeded randomness.
//!
//! All randomness flows through ChaCha8 streams seeded from 64-bit seeds.
//! ChaCha is counter based, so the stream for a given seed is identical on
//! every platform. Derived seeds are produced with the SplitMix64 finaliser.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

const GOLDEN_GAMMA: u64 = 0x9e37_79b9_7f4a_7c15;

/// SplitMix64 output function.
pub fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Derives a sub-seed from a master seed and a path of integer labels.
///
/// The result depends only on its inputs, so any scheduling of the work
/// that consumes the sub-seeds reproduces the same streams.
pub fn derive_seed(master: u64, path: &[u64]) -> u64 {
    let mut state = mix64(master ^ GOLDEN_GAMMA);
    for (depth, &label) in path.iter().enumerate() {
        state = mix64(state.wrapping_add(GOLDEN_GAMMA.wrapping_mul(depth as u64 + 1)) ^ mix64(label));
    }
    state
}

pub fn stream(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Maps a raw 64-bit draw to a uniform double in [0, 1) using the top 53 bits.
#[inline]
pub fn unit_f64(bits: u64) -> f64 {
    (bits >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}
