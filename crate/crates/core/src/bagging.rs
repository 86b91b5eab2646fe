//! Bag construction with per-epoch reshuffling, ground-truth proportions,
//! and a Gaussian-blob generator for synthetic experiments.

use rand::seq::SliceRandom;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::dataset::{Bag, LabeledDataset};
use crate::error::{LlpError, Result};
use crate::simplex::{RngSeed, SimplexVector};

/// How one epoch's instances are grouped into bags.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BagPlan {
    pub bag_size: usize,
    /// Keep the trailing short bag when `bag_size` does not divide `N`.
    pub keep_partial: bool,
    pub epoch_seed: RngSeed,
}

impl BagPlan {
    pub fn new(bag_size: usize, epoch_seed: RngSeed) -> Result<Self> {
        if bag_size == 0 {
            return Err(LlpError::InvalidArguments("bag_size must be at least 1".into()));
        }
        Ok(Self { bag_size, keep_partial: true, epoch_seed })
    }

    pub fn keep_partial(mut self, keep: bool) -> Self {
        self.keep_partial = keep;
        self
    }
}

/// Class histogram of `labels` divided by the bag size.
pub fn bag_proportions(labels: &[usize], num_classes: usize) -> Result<SimplexVector> {
    if labels.is_empty() {
        return Err(LlpError::EmptyBag);
    }
    let mut counts = vec![0usize; num_classes];
    for &label in labels {
        if label >= num_classes {
            return Err(LlpError::LabelOutOfRange { label, num_classes });
        }
        counts[label] += 1;
    }
    let n = labels.len() as f64;
    SimplexVector::new(counts.into_iter().map(|c| c as f64 / n).collect())
}

/// Shuffle all instance indices (Fisher-Yates, uniform over permutations)
/// with the plan's seed, then cut into consecutive bags of `bag_size`.
pub fn make_bags(dataset: &LabeledDataset, plan: &BagPlan) -> Result<Vec<Bag>> {
    if dataset.is_empty() {
        return Err(LlpError::EmptyDataset);
    }
    if plan.bag_size == 0 {
        return Err(LlpError::InvalidArguments("bag_size must be at least 1".into()));
    }
    let mut order: Vec<usize> = (0..dataset.len()).collect();
    order.shuffle(&mut plan.epoch_seed.rng());
    order
        .chunks(plan.bag_size)
        .filter(|chunk| plan.keep_partial || chunk.len() == plan.bag_size)
        .map(|chunk| Bag::from_indices(dataset, chunk.to_vec()))
        .collect()
}

/// Isotropic unit-variance Gaussian blobs. Class `c` is centred at
/// `separation * e_{c mod dim}`; rows are grouped by class.
pub fn gen_blobs(
    n_per_class: usize,
    num_classes: usize,
    dim: usize,
    separation: f64,
    seed: RngSeed,
) -> Result<LabeledDataset> {
    if n_per_class == 0 || dim == 0 || !(separation >= 0.0) {
        return Err(LlpError::InvalidArguments(format!(
            "gen_blobs needs n_per_class >= 1, dim >= 1, separation >= 0 (got {n_per_class}, {dim}, {separation})"
        )));
    }
    let mut rng = seed.rng();
    let mut features = Vec::with_capacity(n_per_class * num_classes);
    let mut labels = Vec::with_capacity(n_per_class * num_classes);
    for class in 0..num_classes {
        for _ in 0..n_per_class {
            let mut row: Vec<f64> = (0..dim).map(|_| rng.sample(StandardNormal)).collect();
            row[class % dim] += separation;
            features.push(row);
            labels.push(class);
        }
    }
    LabeledDataset::new(features, labels, num_classes)
}
