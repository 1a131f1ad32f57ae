//! Sub-seed derivation.
//!
//! Every random stream in the pipeline is keyed off one master seed. A
//! stream id (and, for per-tree streams, an index) is mixed into the master
//! seed with SplitMix64 so that the streams are decorrelated and a change in
//! one consumer never shifts the draws of another.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Train/test shuffle.
pub const STREAM_SPLIT: u64 = 1;
/// Forest bootstraps and feature draws.
pub const STREAM_FOREST: u64 = 2;
/// Network weight initialization and epoch shuffles.
pub const STREAM_NETWORK: u64 = 3;
/// Column permutations for variable importance.
pub const STREAM_PERMUTATION: u64 = 4;

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Derive an independent seed for `stream` from `master`.
pub fn derive_seed(master: u64, stream: u64) -> u64 {
    splitmix64(master ^ splitmix64(stream.wrapping_add(0xA5A5_A5A5_A5A5_A5A5)))
}

pub(crate) fn rng_from(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}
