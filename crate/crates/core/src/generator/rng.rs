//! Seeded random stream used by the generator.
//!
//! The stream is ChaCha8 keyed through `SeedableRng::seed_from_u64`; every
//! draw goes through [`RiddleRng::below`], which only consumes `next_u64`
//! words, so output is identical across platforms and `rand` releases.

use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};
use sha2::{Digest, Sha256};

pub struct RiddleRng(ChaCha8Rng);

impl RiddleRng {
    pub fn seeded(seed: u64) -> Self {
        Self(ChaCha8Rng::seed_from_u64(seed))
    }

    /// Uniform draw from `0..n` by rejection sampling. `n` must be positive.
    pub fn below(&mut self, n: u64) -> u64 {
        assert!(n > 0, "empty range");
        // Largest multiple of n that fits; values at or above it are redrawn.
        let zone = u64::MAX - (u64::MAX % n + 1) % n;
        loop {
            let x = self.0.next_u64();
            if x <= zone {
                return x % n;
            }
        }
    }
}

/// Stable 64-bit seed derived from a base seed and string parts.
pub fn derive_seed(base: u64, parts: &[&str]) -> u64 {
    let mut hasher = Sha256::new();
    hasher.update(base.to_le_bytes());
    for part in parts {
        hasher.update((part.len() as u64).to_le_bytes());
        hasher.update(part.as_bytes());
    }
    let digest = hasher.finalize();
    let mut word = [0u8; 8];
    word.copy_from_slice(&digest[..8]);
    u64::from_le_bytes(word)
}
