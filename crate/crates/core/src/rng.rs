//! Uniforms keyed by `(seed, replica, t)` for any `t` in `i64`.
//!
//! Each key maps to a fixed position of a ChaCha8 keystream: the seed picks
//! the key, the replica picks the stream, and `t` (shifted to offset binary)
//! picks the 64-bit word. Reading consecutive times is a sequential read.

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Deterministic source of one uniform per `(replica, t)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TimeKeyedRandomness {
    seed: u64,
}

impl TimeKeyedRandomness {
    pub fn new(seed: u64) -> Self {
        Self { seed }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// `xi_t` in `[0, 1)` with 53 random bits.
    pub fn uniform(&self, replica: u64, t: i64) -> f64 {
        to_unit(self.positioned(replica, t).next_u64())
    }

    /// `out[i] = uniform(replica, start + i)`.
    pub fn fill(&self, replica: u64, start: i64, out: &mut [f64]) {
        let mut rng = self.positioned(replica, start);
        for v in out {
            *v = to_unit(rng.next_u64());
        }
    }

    fn positioned(&self, replica: u64, t: i64) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(replica);
        let offset = (t as u64) ^ (1 << 63);
        rng.set_word_pos(2 * offset as u128);
        rng
    }
}

fn to_unit(u: u64) -> f64 {
    (u >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}
