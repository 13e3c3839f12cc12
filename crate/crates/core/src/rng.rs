//! Seeded randomness. A run owns one root seed; each consumer forks its own
//! ChaCha stream so re-seeding one purpose never perturbs another.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type Rng = ChaCha8Rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Purpose {
    DataOrder = 1,
    Init = 2,
    Prior = 3,
    Reparam = 4,
    Probe = 5,
    Subsample = 6,
    Synth = 7,
    Split = 8,
    Generate = 9,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SeedTree {
    root: u64,
}

impl SeedTree {
    pub fn new(root: u64) -> Self {
        Self { root }
    }

    pub fn root(&self) -> u64 {
        self.root
    }

    pub fn fork(&self, purpose: Purpose) -> Rng {
        self.fork_indexed(purpose, 0)
    }

    /// Stream for the `index`-th instance of a purpose (e.g. sweep run number).
    pub fn fork_indexed(&self, purpose: Purpose, index: u32) -> Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.root);
        rng.set_stream(((purpose as u64) << 32) | u64::from(index));
        rng
    }
}
