//! Seedable uniform stream with a fixed draw order.
//!
//! All samplers consume exactly one draw per item in ascending index order,
//! so two key constructions fed the same seed see the same uniforms. Draws
//! are clamped away from {0, 1} so logs and powers stay finite.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Clamp bound keeping draws strictly inside (0, 1).
pub const UNIFORM_CLAMP: f64 = 1e-12;

/// Deterministic stream of uniforms in the open interval (0, 1).
///
/// Backed by ChaCha8, which is platform independent and cheap to seed.
/// Identical seeds produce identical draw sequences.
#[derive(Debug, Clone)]
pub struct UniformStream {
    rng: ChaCha8Rng,
    seed: u64,
}

impl UniformStream {
    pub fn new(seed: u64) -> Self {
        Self {
            rng: ChaCha8Rng::seed_from_u64(seed),
            seed,
        }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Next uniform draw, clamped to [1e-12, 1 - 1e-12].
    pub fn next_uniform(&mut self) -> f64 {
        let u: f64 = self.rng.gen();
        u.clamp(UNIFORM_CLAMP, 1.0 - UNIFORM_CLAMP)
    }

    /// `n` draws in index order.
    pub fn draw_n(&mut self, n: usize) -> Vec<f64> {
        (0..n).map(|_| self.next_uniform()).collect()
    }

    /// Fresh substream for an unrelated purpose, derived from this stream.
    pub fn fork(&mut self) -> UniformStream {
        let seed = self.rng.gen::<u64>();
        UniformStream::new(seed)
    }
}
