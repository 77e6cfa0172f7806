//! Counter-based reproducible random streams.
//!
//! Every random draw in this crate is keyed by `(seed, stream, index)`: a
//! fresh ChaCha8 generator is derived per cell with a splitmix64 chain, so a
//! sequence can be generated in parallel over any partition of the index
//! range and still be bit-identical to the sequential scan.
//!
//! Stream numbers are allocated once per kind of draw (noise value, scenario
//! parameter, block corner, symbol, fading gain, ...) by the modules that own
//! them; two draws with different stream numbers never share a generator.

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

/// Seed for a whole run. Equal seeds (with equal configs) give equal outputs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct RngSeed(pub u64);

fn splitmix64(state: &mut u64) -> u64 {
    *state = state.wrapping_add(0x9e37_79b9_7f4a_7c15);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Generator for one `(stream, index)` cell of a seeded run.
pub fn stream_rng(seed: RngSeed, stream: u64, index: u64) -> ChaCha8Rng {
    let mut state = seed.0;
    let _ = splitmix64(&mut state);
    state ^= stream;
    let _ = splitmix64(&mut state);
    state ^= index;
    let mut key = [0u8; 32];
    for chunk in key.chunks_exact_mut(8) {
        chunk.copy_from_slice(&splitmix64(&mut state).to_le_bytes());
    }
    ChaCha8Rng::from_seed(key)
}

/// Derive an independent sub-seed, e.g. one per sweep row.
pub fn derive_seed(seed: RngSeed, salt: u64, index: u64) -> RngSeed {
    let mut state = seed.0;
    let _ = splitmix64(&mut state);
    state ^= salt;
    let _ = splitmix64(&mut state);
    state ^= index;
    RngSeed(splitmix64(&mut state))
}
