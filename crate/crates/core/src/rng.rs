//! Reproducible random streams.
//!
//! Every replica owns an independent ChaCha8 stream. The 256-bit key is
//! derived from the experiment seed with [`SeedableRng::seed_from_u64`] and
//! the 64-bit ChaCha stream id is `(lane << 40) | index`, where `lane`
//! separates the different random sources of one experiment (for instance
//! the two processes of a dominance check, or the grid points of an
//! exit-time scan) and `index` is the replica number. Because the stream of
//! replica `i` depends only on `(seed, lane, i)`, results do not depend on
//! how replicas are scheduled across worker threads.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Random stream type used throughout the crate.
pub type Stream = ChaCha8Rng;

const INDEX_BITS: u32 = 40;

/// Stream for replica `index` in lane `lane` of an experiment seeded with `seed`.
pub fn replica_stream(seed: u64, lane: u32, index: u64) -> Stream {
    assert!(index < (1 << INDEX_BITS), "replica index out of range");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream((u64::from(lane) << INDEX_BITS) | index);
    rng
}

/// Stream for a single run keyed only by a seed (lane 0, replica 0).
pub fn stream(seed: u64) -> Stream {
    replica_stream(seed, 0, 0)
}
