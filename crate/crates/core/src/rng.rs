//! Reproducible random streams.
//!
//! Every replicate of an experiment gets its own ChaCha8 stream selected by
//! `(seed, index)`, so results never depend on how replicates are scheduled
//! across worker threads.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

pub type StreamRng = ChaCha8Rng;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct RngStream {
    pub seed: u64,
    pub index: u64,
}

impl RngStream {
    pub fn new(seed: u64, index: u64) -> Self {
        Self { seed, index }
    }

    /// A fresh generator positioned at the start of this stream.
    pub fn rng(&self) -> StreamRng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(self.index);
        rng
    }
}

/// Left-subtree size of a random binary search tree node of `size` nodes.
///
/// Uniform on `0..size`. Single nodes consume no randomness, which keeps the
/// materialized and streaming generators in lockstep on the same stream.
#[inline]
pub fn draw_left_size<R: Rng + ?Sized>(rng: &mut R, size: u64) -> u64 {
    if size <= 1 {
        0
    } else {
        rng.random_range(0..size)
    }
}
