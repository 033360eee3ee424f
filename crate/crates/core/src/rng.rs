//! Counter-derived random streams.
//!
//! Every random quantity is drawn from a ChaCha8 stream whose key is a pure
//! function of `(master seed, purpose, index, sub-index)`, so results never
//! depend on thread count or the order in which replicates are evaluated.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type StreamRng = ChaCha8Rng;

/// What a stream is used for; keeps streams for different purposes disjoint.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[repr(u64)]
pub enum Purpose {
    Bootstrap = 1,
    BootstrapRetry = 2,
    Dataset = 3,
    Chernoff = 4,
    Experiment = 5,
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Stream for `(seed, purpose, index, sub)`.
pub fn stream(seed: u64, purpose: Purpose, index: u64, sub: u64) -> StreamRng {
    let words = [
        splitmix64(seed),
        splitmix64(purpose as u64 ^ 0x5DEE_CE66_D1CE_4E5B),
        splitmix64(index),
        splitmix64(sub.wrapping_add(0xA076_1D64_78BD_642F)),
    ];
    let mut key = [0u8; 32];
    for (chunk, w) in key.chunks_exact_mut(8).zip(words) {
        chunk.copy_from_slice(&w.to_le_bytes());
    }
    ChaCha8Rng::from_seed(key)
}

/// Derives a child master seed, e.g. the bootstrap seed of one simulated dataset.
pub fn child_seed(seed: u64, purpose: Purpose, index: u64) -> u64 {
    splitmix64(splitmix64(seed ^ splitmix64(purpose as u64)) ^ index)
}
