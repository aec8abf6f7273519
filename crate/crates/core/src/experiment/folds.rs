use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use crate::data::{apply_preprocess, fit_preprocess, Dataset, PreprocessStats};
use crate::error::{Error, Result};
use crate::rng::rng_from_seed;

/// Assignment of every row to one of `k` folds.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FoldPlan {
    pub k: usize,
    pub assignments: Vec<usize>,
    pub seed: u64,
}

impl FoldPlan {
    pub fn validation_indices(&self, fold: usize) -> Vec<usize> {
        (0..self.assignments.len()).filter(|&i| self.assignments[i] == fold).collect()
    }

    pub fn training_indices(&self, fold: usize) -> Vec<usize> {
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

/// Stratified k-fold: each class is shuffled with `seed` and dealt round-robin,
/// the negatives continuing where the positives stopped so fold sizes stay
/// within one of each other.
pub fn stratified_kfold(ds: &Dataset, k: usize, seed: u64) -> Result<FoldPlan> {
    if k < 2 {
        return Err(Error::param("folds", "must be at least 2"));
    }
    let (mut pos, mut neg): (Vec<usize>, Vec<usize>) = (0..ds.n_rows()).partition(|&i| ds.label(i) == 1);
    if pos.len() < k || neg.len() < k {
        return Err(Error::Data(format!(
            "stratified {k}-fold needs at least {k} rows per class, have {} positives and {} negatives",
            pos.len(),
            neg.len()
        )));
    }
    let mut rng = rng_from_seed(seed);
    pos.shuffle(&mut rng);
    neg.shuffle(&mut rng);
    let mut assignments = vec![0; ds.n_rows()];
    for (slot, &i) in pos.iter().chain(&neg).enumerate() {
        assignments[i] = slot % k;
    }
    Ok(FoldPlan { k, assignments, seed })
}

/// One fold, split and preprocessed with statistics fitted on its training rows.
#[derive(Debug, Clone)]
pub struct FoldData {
    pub fold: usize,
    pub training_indices: Vec<usize>,
    pub validation_indices: Vec<usize>,
    pub stats: PreprocessStats,
    pub train: Dataset,
    pub validation: Dataset,
    /// Fingerprint of the raw validation rows that get scored.
    pub validation_raw_fingerprint: u64,
}

pub fn prepare_fold(ds: &Dataset, plan: &FoldPlan, fold: usize, missing_threshold: f64) -> Result<FoldData> {
    if plan.assignments.len() != ds.n_rows() {
        return Err(Error::Data("fold plan was built for a different dataset".into()));
    }
    if fold >= plan.k {
        return Err(Error::param("fold", format!("{fold} is out of range for {} folds", plan.k)));
    }
    let training_indices = plan.training_indices(fold);
    let validation_indices = plan.validation_indices(fold);
    let train_raw = ds.select_rows(&training_indices);
    let validation_raw = ds.select_rows(&validation_indices);
    let stats = fit_preprocess(&train_raw, missing_threshold)?;
    Ok(FoldData {
        fold,
        train: apply_preprocess(&train_raw, &stats)?,
        validation: apply_preprocess(&validation_raw, &stats)?,
        validation_raw_fingerprint: super::fingerprint(&validation_raw),
        stats,
        training_indices,
        validation_indices,
    })
}
