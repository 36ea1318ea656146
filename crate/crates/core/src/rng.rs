//! Deterministic randomness.
//!
//! Every consumer derives its own ChaCha8 stream from a `(seed, domain, index)`
//! triple, so the values drawn for point `i` or trial `r` never depend on how
//! many other points or trials were processed before it, or on which thread.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

/// Domains keep independent consumers of one master seed apart.
pub mod domain {
    pub const SAMPLE: u64 = 0x5341_4d50;
    pub const SUBSAMPLE: u64 = 0x5355_4253;
    pub const GMM_INIT: u64 = 0x474d_4d49;
    pub const TRIAL: u64 = 0x5452_4941;
    pub const POWER_ITERATION: u64 = 0x5057_4954;
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct SeedStream {
    seed: u64,
}

impl SeedStream {
    pub fn new(seed: u64) -> Self {
        Self { seed }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Child stream for an independent consumer.
    pub fn derive(&self, domain: u64) -> Self {
        Self {
            seed: splitmix64(self.seed ^ splitmix64(domain)),
        }
    }

    /// Child stream for the `index`-th repetition inside a domain.
    pub fn derive_indexed(&self, domain: u64, index: u64) -> Self {
        self.derive(domain).derive(index)
    }

    /// Generator for item `index`. ChaCha's 64-bit stream id carries the index.
    pub fn rng(&self, index: u64) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(index);
        rng
    }
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}
