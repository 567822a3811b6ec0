//! Deterministic, splittable random number streams.
//!
//! Every chain and every replication owns exactly one [`RngStream`].
//! Streams are ChaCha12 instances keyed by a 64-bit seed, with the 64-bit
//! ChaCha stream counter as the stream id: identical `(seed, stream_id)`
//! pairs reproduce the same draw sequence, and distinct stream ids select
//! non-overlapping keystreams by construction.

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha12Rng;

#[derive(Debug, Clone)]
pub struct RngStream {
    seed: u64,
    stream_id: u64,
    rng: ChaCha12Rng,
}

impl RngStream {
    /// Root stream for a seed (stream id 0).
    pub fn new(seed: u64) -> Self {
        Self::with_stream(seed, 0)
    }

    /// Stream with an explicit id, e.g. one per replication index.
    pub fn with_stream(seed: u64, stream_id: u64) -> Self {
        let mut rng = ChaCha12Rng::seed_from_u64(seed);
        rng.set_stream(stream_id);
        Self { seed, stream_id, rng }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn stream_id(&self) -> u64 {
        self.stream_id
    }

    /// Deterministic child stream. Children with distinct ids get distinct
    /// stream counters, hence independent keystreams.
    pub fn split(&self, id: u64) -> RngStream {
        RngStream::with_stream(self.seed, mix(self.stream_id, id))
    }

    /// Uniform draw on [0, 1).
    pub fn uniform(&mut self) -> f64 {
        rand::Rng::random(&mut self.rng)
    }

    /// Standard normal draw.
    pub fn standard_normal(&mut self) -> f64 {
        rand::Rng::sample(&mut self.rng, rand_distr::StandardNormal)
    }

    /// Uniform integer in [0, bound).
    pub fn below(&mut self, bound: usize) -> usize {
        rand::Rng::random_range(&mut self.rng, 0..bound)
    }
}

/// See [`RngStream::split`].
pub fn split_stream(root: &RngStream, id: u64) -> RngStream {
    root.split(id)
}

// SplitMix64 finalizer; injective in `id` for a fixed parent.
fn mix(parent: u64, id: u64) -> u64 {
    let mut z = parent
        .wrapping_mul(0xff51_afd7_ed55_8ccd)
        .wrapping_add(id)
        .wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

impl RngCore for RngStream {
    fn next_u32(&mut self) -> u32 {
        self.rng.next_u32()
    }

    fn next_u64(&mut self) -> u64 {
        self.rng.next_u64()
    }

    fn fill_bytes(&mut self, dest: &mut [u8]) {
        self.rng.fill_bytes(dest)
    }
}
