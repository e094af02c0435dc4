//! Seeded random streams.
//!
//! Every generator draws from ChaCha8 keyed by a 64-bit seed, with an
//! independent stream number per graph (or per restart), so bundles are
//! bit-reproducible across platforms and graphs can be sampled in any order.

use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};

pub struct SeededStream {
    inner: ChaCha8Rng,
}

impl SeededStream {
    pub fn new(seed: u64, stream: u64) -> Self {
        let mut inner = ChaCha8Rng::seed_from_u64(seed);
        inner.set_stream(stream);
        Self { inner }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.inner.next_u64()
    }

    /// Uniform variate in `[0, 1)` with 53 bits of precision.
    pub fn uniform(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform index in `0..bound` (`bound > 0`).
    pub fn index(&mut self, bound: usize) -> usize {
        let i = (self.uniform() * bound as f64) as usize;
        i.min(bound - 1)
    }
}
