//! Deterministic 80/10/10 dataset splits.
//!
//! Ids are sorted lexicographically before the seeded Fisher-Yates shuffle,
//! so the assignment depends only on the id set and the seed, never on input
//! order.

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use super::KbError;
use crate::seed::derived_rng;

/// Disjoint train/dev/test id sets, stored in assignment order.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SplitAssignment {
    pub seed: u64,
    pub train: Vec<String>,
    pub dev: Vec<String>,
    pub test: Vec<String>,
}

impl SplitAssignment {
    pub fn total(&self) -> usize {
        self.train.len() + self.dev.len() + self.test.len()
    }
}

/// Split sizes for `n` entries: train = round(0.8n), dev = round(0.1n),
/// test = remainder. Rounding is half-away-from-zero, done in integer
/// arithmetic so every platform agrees.
pub fn split_sizes(n: usize) -> (usize, usize, usize) {
    let train = (8 * n + 5) / 10;
    let dev = (n + 5) / 10;
    let dev = dev.min(n - train);
    (train, dev, n - train - dev)
}

/// Partitions `ids` into train/dev/test per [`split_sizes`].
pub fn split_dataset(ids: &[String], seed: u64) -> Result<SplitAssignment, KbError> {
    if ids.is_empty() {
        return Err(KbError::EmptyInput);
    }
    let mut sorted: Vec<String> = ids.to_vec();
    sorted.sort_unstable();
    if sorted.windows(2).any(|w| w[0] == w[1]) {
        return Err(KbError::DuplicateIds);
    }

    let mut rng = derived_rng(seed, &[]);
    sorted.shuffle(&mut rng);

    let (n_train, n_dev, _) = split_sizes(sorted.len());
    let test = sorted.split_off(n_train + n_dev);
    let dev = sorted.split_off(n_train);
    Ok(SplitAssignment {
        seed,
        train: sorted,
        dev,
        test,
    })
}
