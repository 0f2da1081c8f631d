//! Seeded path-prefix sampling.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::local::MassFunction;
use crate::space::Situation;

/// Extends a situation one state at a time. Identical seeds give identical
/// paths on every platform.
#[derive(Debug, Clone)]
pub struct PathSampler {
    arity: usize,
    prefix: Situation,
    seed: u64,
    rng: ChaCha8Rng,
}

impl PathSampler {
    pub fn new(arity: usize, prefix: Situation, seed: u64) -> Self {
        Self {
            arity,
            prefix,
            seed,
            rng: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// The current prefix `ω^k`.
    pub fn prefix(&self) -> &Situation {
        &self.prefix
    }

    /// Appends a uniformly drawn state.
    pub fn extend(&mut self) -> usize {
        let x = self.rng.gen_range(0..self.arity);
        self.prefix.0.push(x);
        x
    }

    /// Appends a state drawn from `p`.
    pub fn extend_with(&mut self, p: &MassFunction) -> usize {
        let u: f64 = self.rng.gen();
        let mut acc = 0.0;
        let mut x = p.len() - 1;
        for (i, &q) in p.probs().iter().enumerate() {
            acc += q;
            if u < acc {
                x = i;
                break;
            }
        }
        self.prefix.0.push(x);
        x
    }

    /// Extends uniformly until the prefix has length `len`.
    pub fn sample_to(&mut self, len: usize) -> &Situation {
        while self.prefix.len() < len {
            self.extend();
        }
        &self.prefix
    }

    /// Resets to `prefix` without reseeding.
    pub fn restart(&mut self, prefix: Situation) {
        self.prefix = prefix;
    }
}
