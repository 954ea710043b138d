//! Seeded random streams.
//!
//! Every stochastic component draws from a [`RandomStream`]. Streams are
//! single-owner; parallel work derives its own stream from a [`SeedPath`],
//! which hashes the master seed together with a sequence of labels so the
//! numbers a work unit sees never depend on the order units are scheduled.

use rand::seq::SliceRandom;
use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha12Rng;
use sha2::{Digest, Sha256};

/// A deterministic stream of uniform and standard-normal variates.
#[derive(Debug, Clone)]
pub struct RandomStream {
    rng: ChaCha12Rng,
    spare_normal: Option<f64>,
}

impl RandomStream {
    pub fn new(seed: u64) -> Self {
        Self {
            rng: ChaCha12Rng::seed_from_u64(seed),
            spare_normal: None,
        }
    }

    /// Uniform variate in `[0, 1)`.
    pub fn uniform(&mut self) -> f64 {
        self.rng.random::<f64>()
    }

    pub fn next_u32(&mut self) -> u32 {
        self.rng.next_u32()
    }

    /// Uniform index in `0..n`. `n` must be positive.
    pub fn index_below(&mut self, n: usize) -> usize {
        self.rng.random_range(0..n)
    }

    /// One standard normal variate.
    ///
    /// Box–Muller: each pair of uniforms yields two normals, the second of
    /// which is kept for the next call.
    pub fn standard_normal(&mut self) -> f64 {
        if let Some(z) = self.spare_normal.take() {
            return z;
        }
        // 1 - u lies in (0, 1], so the logarithm is finite.
        let u1 = 1.0 - self.uniform();
        let u2 = self.uniform();
        let radius = (-2.0 * u1.ln()).sqrt();
        let angle = std::f64::consts::TAU * u2;
        self.spare_normal = Some(radius * angle.sin());
        radius * angle.cos()
    }

    pub fn shuffle<T>(&mut self, items: &mut [T]) {
        items.shuffle(&mut self.rng);
    }
}

/// Builder for substream seeds: `hash(master, label, label, ...)`.
///
/// Labels are length-prefixed before hashing so `("ab", "c")` and
/// `("a", "bc")` give different seeds.
#[derive(Debug, Clone)]
pub struct SeedPath {
    hasher: Sha256,
}

impl SeedPath {
    pub fn new(master_seed: u64) -> Self {
        let mut hasher = Sha256::new();
        hasher.update(b"fatune-seed-v1");
        hasher.update(master_seed.to_le_bytes());
        Self { hasher }
    }

    pub fn tag(mut self, label: &str) -> Self {
        self.hasher.update([0u8]);
        self.hasher.update((label.len() as u64).to_le_bytes());
        self.hasher.update(label.as_bytes());
        self
    }

    pub fn index(mut self, index: u64) -> Self {
        self.hasher.update([1u8]);
        self.hasher.update(index.to_le_bytes());
        self
    }

    pub fn seed(&self) -> u64 {
        let digest = self.hasher.clone().finalize();
        let mut bytes = [0u8; 8];
        bytes.copy_from_slice(&digest[..8]);
        u64::from_le_bytes(bytes)
    }

    pub fn stream(&self) -> RandomStream {
        RandomStream::new(self.seed())
    }
}
