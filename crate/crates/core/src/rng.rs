//! Seed derivation.
//!
//! Every command takes one 64-bit master seed. Independent random draws
//! (a split, a fold assignment, tree `i` of a forest, the MLP shuffle) each
//! get their own ChaCha8 stream keyed by `(master seed, stream id)`, so the
//! values a consumer sees do not depend on how many numbers other consumers
//! drew or in which order they ran. Stream ids are built as
//! `purpose << 32 | index`.
//!
//! Nested consumers (a forest trained inside fold 3 of a CV run) get a child
//! master seed from [`derive_seed`], a SplitMix64 hash of the parent seed and
//! the stream id.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u64)]
pub enum Purpose {
    Generator = 1,
    Split = 2,
    Folds = 3,
    ForestTree = 4,
    MlpInit = 5,
    MlpShuffle = 6,
    Permutation = 7,
    Model = 8,
    Fold = 9,
    SweepCell = 10,
    Member = 11,
}

pub fn stream_id(purpose: Purpose, index: u64) -> u64 {
    ((purpose as u64) << 32) | (index & 0xffff_ffff)
}

/// Generator for one independent stream.
pub fn stream(seed: u64, purpose: Purpose, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream_id(purpose, index));
    rng
}

/// Child master seed for a nested consumer.
pub fn derive_seed(seed: u64, purpose: Purpose, index: u64) -> u64 {
    splitmix64(seed ^ splitmix64(stream_id(purpose, index)))
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}
