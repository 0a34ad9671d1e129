#![allow(dead_code)]

use dilatrix::gen;
use dilatrix::{ComplexMatrix, ContractionTuple};

/// Class member of length `n` and dimension at most `max_dim`.
pub fn member(seed: u64, n: usize, max_dim: usize) -> ContractionTuple {
    gen::random_member(seed, n, max_dim).expect("generator")
}

pub fn commutant(tuple: &ContractionTuple, seed: u64) -> ComplexMatrix {
    gen::gen_commutant(tuple, seed).expect("commutant")
}

/// `n ∈ {lo, …, hi}` chosen from the seed.
pub fn arity(seed: u64, lo: usize, hi: usize) -> usize {
    lo + (seed as usize * 7 + 3) % (hi - lo + 1)
}
