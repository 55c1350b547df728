//! Seeded random sampling shared by verification routines and tests.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Deterministic sampler of points and vectors in a symmetric box.
#[derive(Debug, Clone)]
pub struct Sampler {
    rng: ChaCha8Rng,
    radius: f64,
}

impl Sampler {
    pub fn new(seed: u64) -> Self {
        Self::with_radius(seed, 1.0)
    }

    pub fn with_radius(seed: u64, radius: f64) -> Self {
        Self {
            rng: ChaCha8Rng::seed_from_u64(seed),
            radius,
        }
    }

    pub fn scalar(&mut self) -> f64 {
        self.rng.random_range(-self.radius..=self.radius)
    }

    pub fn range(&mut self, lo: f64, hi: f64) -> f64 {
        self.rng.random_range(lo..=hi)
    }

    pub fn vector(&mut self, n: usize) -> Vec<f64> {
        (0..n).map(|_| self.scalar()).collect()
    }

    pub fn rng(&mut self) -> &mut ChaCha8Rng {
        &mut self.rng
    }
}
