//! Counter-based stream derivation.
//!
//! Every random draw in the crate comes from a stream addressed by
//! `(seed, trial_index, stream_id)`, so trial results do not depend on the
//! order in which a thread pool schedules them.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Stream identifiers used by the generators.
pub mod streams {
    pub const SIGNAL: u64 = 1;
    pub const MATRIX: u64 = 2;
    pub const NOISE: u64 = 3;
    pub const CV_FOLDS: u64 = 4;
    pub const LAMBDA: u64 = 5;
}

pub type StreamRng = ChaCha8Rng;

/// Builds the generator for one `(seed, trial_index, stream_id)` address.
pub fn stream(seed: u64, trial_index: u64, stream_id: u64) -> StreamRng {
    let mut key = [0u8; 32];
    key[0..8].copy_from_slice(&seed.to_le_bytes());
    key[8..16].copy_from_slice(&trial_index.to_le_bytes());
    key[16..24].copy_from_slice(&stream_id.to_le_bytes());
    key[24..32].copy_from_slice(b"m1bitcsl");
    ChaCha8Rng::from_seed(key)
}
