//! Seeded coordinate selection.
//!
//! Every worker builds its own sampler from the shared seed, so index
//! choices agree everywhere without communication. SA and classic variants
//! draw from the stream in the same order, hence see the same indices.

use rand::seq::index;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::matrix::IndexSelection;

#[derive(Clone, Debug)]
pub struct CoordinateSampler {
    rng: ChaCha8Rng,
    drawn: usize,
}

impl CoordinateSampler {
    pub fn new(seed: u64) -> Self {
        Self { rng: ChaCha8Rng::seed_from_u64(seed), drawn: 0 }
    }

    /// `size` distinct indices below `bound`, uniformly without replacement.
    pub fn next_block(&mut self, bound: usize, size: usize) -> IndexSelection {
        let indices = index::sample(&mut self.rng, bound, size).into_vec();
        self.drawn += 1;
        IndexSelection::new(indices, self.drawn)
    }

    /// One index below `bound`, uniformly (repeats across calls allowed).
    pub fn next_index(&mut self, bound: usize) -> usize {
        self.drawn += 1;
        self.rng.gen_range(0..bound)
    }
}
