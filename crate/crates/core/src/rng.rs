//! Reproducible random streams.
//!
//! Every random quantity is drawn from a ChaCha8 stream whose key is built
//! from `(seed, purpose, round)` and whose stream id is the item index.
//! Streams therefore depend only on these labels, never on thread
//! scheduling or on how many draws other items consumed.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// What a stream is used for; keeps unrelated draws independent.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u64)]
pub enum Purpose {
    TensorInit = 1,
    Samples = 2,
    Rollout = 3,
    Probes = 4,
    Evaluation = 5,
    BoundarySamples = 6,
    Trajectory = 7,
    Check = 8,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct StreamFactory {
    seed: u64,
}

impl StreamFactory {
    pub fn new(seed: u64) -> Self {
        Self { seed }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn stream(&self, purpose: Purpose, round: u64, index: u64) -> ChaCha8Rng {
        let mut key = [0u8; 32];
        key[..8].copy_from_slice(&self.seed.to_le_bytes());
        key[8..16].copy_from_slice(&(purpose as u64).to_le_bytes());
        key[16..24].copy_from_slice(&round.to_le_bytes());
        let mut rng = ChaCha8Rng::from_seed(key);
        rng.set_stream(index);
        rng
    }
}
