use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;

use crate::{Error, Result};

/// A deterministic partition of row indices into k folds of near-equal size.
#[derive(Debug, Clone)]
pub struct FoldAssignment {
    k: usize,
    assignment: Vec<u32>,
    seed: u64,
}

impl FoldAssignment {
    pub fn k(&self) -> usize {
        self.k
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn n_rows(&self) -> usize {
        self.assignment.len()
    }

    /// Fold index of each row.
    pub fn assignment(&self) -> &[u32] {
        &self.assignment
    }

    /// Row indices inside fold `fold`, ascending.
    pub fn fold_rows(&self, fold: usize) -> Vec<usize> {
        self.assignment
            .iter()
            .enumerate()
            .filter_map(|(i, &f)| (f as usize == fold).then_some(i))
            .collect()
    }

    /// Row indices outside fold `fold`, ascending.
    pub fn complement_rows(&self, fold: usize) -> Vec<usize> {
        self.assignment
            .iter()
            .enumerate()
            .filter_map(|(i, &f)| (f as usize != fold).then_some(i))
            .collect()
    }
}

/// Randomly partitions `n_rows` rows into `k` folds whose sizes differ by at
/// most one. Pure function of `(n_rows, k, seed)`.
pub fn kfold(n_rows: usize, k: usize, seed: u64) -> Result<FoldAssignment> {
    if k < 2 {
        return Err(Error::InvalidParam(format!("k must be at least 2, got {k}")));
    }
    if k > n_rows {
        return Err(Error::InvalidParam(format!(
            "k = {k} exceeds the number of rows {n_rows}"
        )));
    }
    let mut order: Vec<usize> = (0..n_rows).collect();
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    order.shuffle(&mut rng);
    let mut assignment = vec![0u32; n_rows];
    for (pos, &row) in order.iter().enumerate() {
        assignment[row] = (pos % k) as u32;
    }
    Ok(FoldAssignment { k, assignment, seed })
}
