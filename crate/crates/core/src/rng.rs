//! Seed substreams.
//!
//! Every random quantity is drawn from a generator keyed by a path of
//! integers (master seed, member index, row index, attempt, ...). Results
//! therefore never depend on the order in which work is scheduled.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type StreamRng = ChaCha8Rng;

const GOLDEN: u64 = 0x9e37_79b9_7f4a_7c15;

/// SplitMix64 finalizer.
fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Derives a child seed from `parent` and a tag.
pub fn derive_seed(parent: u64, tag: u64) -> u64 {
    mix64(parent ^ mix64(tag.wrapping_add(1).wrapping_mul(GOLDEN)))
}

/// Derives a seed from a path of tags.
pub fn derive_path(parent: u64, path: &[u64]) -> u64 {
    path.iter().fold(parent, |seed, &tag| derive_seed(seed, tag))
}

/// Generator for the substream identified by `seed`.
pub fn stream(seed: u64) -> StreamRng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Generator for the substream at `path` below `seed`.
pub fn substream(seed: u64, path: &[u64]) -> StreamRng {
    stream(derive_path(seed, path))
}
