use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng;

/// Assignment of every sample to one of `k` folds.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FoldPlan {
    pub k: usize,
    pub assignments: Vec<usize>,
    pub seed: u64,
}

impl FoldPlan {
    pub fn test_indices(&self, fold: usize) -> Vec<usize> {
        (0..self.assignments.len()).filter(|&i| self.assignments[i] == fold).collect()
    }

    pub fn train_indices(&self, fold: usize) -> Vec<usize> {
        (0..self.assignments.len()).filter(|&i| self.assignments[i] != fold).collect()
    }

    pub fn fold_sizes(&self) -> Vec<usize> {
        let mut sizes = vec![0; self.k];
        for &f in &self.assignments {
            sizes[f] += 1;
        }
        sizes
    }
}

/// Stratified k-fold assignment.
///
/// Each class is shuffled with its own seeded stream, then the classes are
/// laid out back to back (ascending class id) and dealt round-robin over the
/// folds with one shared cursor. Every class therefore lands within one sample
/// of perfect proportionality per fold, and with `n >= k` no fold is empty.
pub fn stratified_kfold(labels: &[usize], k: usize, seed: u64) -> Result<FoldPlan> {
    if k < 2 {
        return Err(Error::invalid_param(format!("k={k}, need k >= 2")));
    }
    if k > labels.len() {
        return Err(Error::invalid_param(format!(
            "k={k} exceeds sample count {}",
            labels.len()
        )));
    }
    let n_classes = labels.iter().copied().max().map_or(0, |m| m + 1);
    let mut by_class = vec![Vec::new(); n_classes];
    for (i, &y) in labels.iter().enumerate() {
        by_class[y].push(i);
    }
    let mut assignments = vec![0usize; labels.len()];
    let mut cursor = 0usize;
    for (c, members) in by_class.iter_mut().enumerate() {
        let mut r = rng::rng(rng::child(seed, "stratified-kfold", c as u64));
        members.shuffle(&mut r);
        for &i in members.iter() {
            assignments[i] = cursor % k;
            cursor += 1;
        }
    }
    Ok(FoldPlan { k, assignments, seed })
}
