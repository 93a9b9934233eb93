//! Deterministic stream derivation for parallel Monte Carlo work.
//!
//! Every random draw in a campaign comes from a stream derived from the
//! campaign seed and a fixed integer path naming the draw site (stage tag,
//! realization index, link indices). Streams are independent of worker
//! count and iteration order, so parallel and sequential runs produce
//! bit-identical results.

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Stage tag for the user-position draws of one realization.
pub const STAGE_DROP: u64 = 1;
/// Stage tag for the channel draws of one link.
pub const STAGE_CHANNEL: u64 = 2;

const GAMMA: u64 = 0x9E37_79B9_7F4A_7C15;

/// splitmix64 finalizer; bijective on u64.
fn mix(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Derives a generator for the draw site named by `path`, rooted at `seed`.
///
/// The derivation absorbs each path element into a splitmix64 chain and
/// expands the final state into a 256-bit stream key. Distinct paths give
/// statistically independent streams; equal paths give identical streams.
pub fn derive_rng(seed: u64, path: &[u64]) -> ChaCha8Rng {
    let mut state = mix(seed ^ GAMMA);
    for (depth, &element) in path.iter().enumerate() {
        state = mix(state ^ element.wrapping_add(GAMMA.wrapping_mul(depth as u64 + 1)));
    }
    let mut key = [0u8; 32];
    for chunk in key.chunks_exact_mut(8) {
        state = mix(state.wrapping_add(GAMMA));
        chunk.copy_from_slice(&state.to_le_bytes());
    }
    ChaCha8Rng::from_seed(key)
}
