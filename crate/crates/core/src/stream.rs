//! Seedable, splittable deterministic randomness.
//!
//! A [`RandomStream`] is a ChaCha20 generator keyed by a 32-byte key. Sub-streams
//! are derived from the parent key and a `(label, index)` pair, never from the
//! parent's position, so a split gives the same stream whether it happens before
//! or after the parent has been consumed.

use rand_chacha::ChaCha20Rng;
use rand_core::{RngCore, SeedableRng};
use sha2::{Digest, Sha256};

const DOMAIN: &[u8] = b"securesum/stream/v1";

#[derive(Debug, Clone)]
pub struct RandomStream {
    key: [u8; 32],
    rng: ChaCha20Rng,
}

impl RandomStream {
    pub fn new(seed: u64) -> Self {
        let mut hasher = Sha256::new();
        hasher.update(DOMAIN);
        hasher.update(seed.to_le_bytes());
        Self::from_key(hasher.finalize().into())
    }

    fn from_key(key: [u8; 32]) -> Self {
        Self { key, rng: ChaCha20Rng::from_seed(key) }
    }

    /// Independent sub-stream named by `(label, index)`.
    pub fn split(&self, label: &str, index: u64) -> Self {
        let mut hasher = Sha256::new();
        hasher.update(DOMAIN);
        hasher.update(self.key);
        hasher.update((label.len() as u64).to_le_bytes());
        hasher.update(label.as_bytes());
        hasher.update(index.to_le_bytes());
        Self::from_key(hasher.finalize().into())
    }

    pub fn next_u32(&mut self) -> u32 {
        self.rng.next_u32()
    }

    pub fn next_u64(&mut self) -> u64 {
        self.rng.next_u64()
    }

    /// Uniform integer in `[0, bound)`; `bound` must be nonzero.
    pub fn below(&mut self, bound: u64) -> u64 {
        assert!(bound > 0, "empty range");
        let zone = u64::MAX - (u64::MAX % bound);
        loop {
            let x = self.next_u64();
            if x < zone {
                return x % bound;
            }
        }
    }
}
