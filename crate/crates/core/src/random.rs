//! Seeded generators for test suites and the `random` CLI subcommand.
//!
//! Every generator draws from ChaCha8 seeded with a `u64`, so a given seed
//! yields the same objects on every platform.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::linmod::{MatrixMod, ModRing};
use crate::program::{Alphabet, Mapping};

pub type SuiteRng = ChaCha8Rng;

pub fn rng(seed: u64) -> SuiteRng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_mapping(alphabet: &Alphabet, rng: &mut impl Rng) -> Mapping {
    let size = alphabet.size();
    let images = (0..size).map(|_| rng.random_range(0..size)).collect();
    Mapping::new(alphabet.clone(), images).expect("images drawn in range")
}

pub fn random_bijection(alphabet: &Alphabet, rng: &mut impl Rng) -> Mapping {
    let mut images: Vec<usize> = alphabet.indices().collect();
    images.shuffle(rng);
    Mapping::new(alphabet.clone(), images).expect("a shuffle is a permutation")
}

/// Mapping whose image set has at most `classes` elements.
pub fn random_mapping_with_classes(alphabet: &Alphabet, classes: usize, rng: &mut impl Rng) -> Mapping {
    let size = alphabet.size();
    let mut pool: Vec<usize> = (0..size).collect();
    pool.shuffle(rng);
    pool.truncate(classes.clamp(1, size));
    let images = (0..size).map(|_| pool[rng.random_range(0..pool.len())]).collect();
    Mapping::new(alphabet.clone(), images).expect("images drawn in range")
}

/// `n x n` matrix with independent uniform entries.
pub fn random_matrix(ring: &ModRing, n: usize, rng: &mut impl Rng) -> MatrixMod {
    let rows = (0..n).map(|_| (0..n).map(|_| rng.random_range(0..ring.s())).collect()).collect();
    MatrixMod::new(ring.clone(), rows).expect("square and non-empty")
}
