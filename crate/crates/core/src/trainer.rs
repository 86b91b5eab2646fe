//! Epoch loop over freshly shuffled bags, one optimizer step per bag.

use std::io::Write;
use std::path::Path;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::bagging::{make_bags, BagPlan};
use crate::dataset::LabeledDataset;
use crate::error::{LlpError, Result};
use crate::losses::{LossKind, LossParams};
use crate::model::{backward, forward, aggregate_predictions, Architecture, ModelParams, Objective};
use crate::optim::{clip_global_norm, Optimizer, OptimizerKind};
use crate::simplex::RngSeed;

/// Clip norm applied to DLLP runs when none is configured.
pub const DEFAULT_DLLP_CLIP: f64 = 10.0;

/// Number of trailing epochs averaged by [`validation_score`] by default.
pub const DEFAULT_LAST_K: usize = 3;

// Independent random streams carved from the run seed.
const STREAM_INIT: u64 = 0x1;
const STREAM_TRAIN_BAGS: u64 = 0x2;
const STREAM_VAL_BAGS: u64 = 0x3;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TrainConfig {
    pub bag_size: usize,
    pub epochs: usize,
    pub learning_rate: f64,
    pub alpha: f64,
    pub lambda: f64,
    pub optimizer: OptimizerKind,
    pub seed: u64,
    pub loss: LossKind,
    pub arch: Architecture,
    pub hidden: usize,
    pub keep_partial: bool,
    /// Global gradient-norm clip. `None` picks per loss: 10 for DLLP, off
    /// otherwise. A non-positive value disables clipping.
    pub clip_norm: Option<f64>,
    /// Record wall-clock seconds per epoch; off gives byte-identical history files.
    pub timing: bool,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            bag_size: 16,
            epochs: 20,
            learning_rate: 0.01,
            alpha: 1.0,
            lambda: 0.0,
            optimizer: OptimizerKind::Adaptive,
            seed: 0,
            loss: LossKind::TvStar,
            arch: Architecture::Linear,
            hidden: 16,
            keep_partial: true,
            clip_norm: None,
            timing: true,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(LlpError::Config(msg));
        if self.epochs == 0 {
            return bad("epochs must be >= 1".into());
        }
        if self.bag_size == 0 {
            return bad("bag_size must be >= 1".into());
        }
        if !(self.learning_rate > 0.0) || !self.learning_rate.is_finite() {
            return bad(format!("learning_rate must be > 0, got {}", self.learning_rate));
        }
        if !(self.alpha > 0.0) || !self.alpha.is_finite() {
            return bad(format!("alpha must be > 0, got {}", self.alpha));
        }
        if !(self.lambda >= 0.0) || !self.lambda.is_finite() {
            return bad(format!("lambda must be >= 0, got {}", self.lambda));
        }
        if self.arch == Architecture::Mlp1 && self.hidden == 0 {
            return bad("hidden must be >= 1 for mlp1".into());
        }
        Ok(())
    }

    pub fn objective(&self) -> Result<Objective> {
        Ok(Objective::new(self.loss, LossParams::new(self.alpha, self.lambda)?))
    }

    pub fn effective_clip_norm(&self) -> Option<f64> {
        match self.clip_norm {
            Some(v) if v > 0.0 && v.is_finite() => Some(v),
            Some(_) => None,
            None if self.loss == LossKind::Dllp => Some(DEFAULT_DLLP_CLIP),
            None => None,
        }
    }

    pub fn run_seed(&self) -> RngSeed {
        RngSeed(self.seed)
    }
}

/// Per-epoch record of a training run.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct TrainHistory {
    /// Mean proportion loss over the epoch's training bags.
    pub train_loss: Vec<f64>,
    /// Mean proportion loss over validation bags after the epoch; `None`
    /// without a validation split.
    pub val_loss: Vec<Option<f64>>,
    pub seconds: Vec<f64>,
    /// Smallest and largest per-bag proportion loss seen in the epoch.
    pub bag_loss_min: Vec<f64>,
    pub bag_loss_max: Vec<f64>,
}

impl TrainHistory {
    pub const CSV_HEADER: &'static str = "epoch,train_loss,val_loss,seconds";

    pub fn len(&self) -> usize {
        self.train_loss.len()
    }

    pub fn is_empty(&self) -> bool {
        self.train_loss.is_empty()
    }

    /// `epoch,train_loss,val_loss,seconds`; missing validation is an empty field.
    pub fn to_csv(&self) -> String {
        let mut out = String::from(Self::CSV_HEADER);
        out.push('\n');
        for epoch in 0..self.len() {
            let val = self.val_loss[epoch].map(|v| v.to_string()).unwrap_or_default();
            out.push_str(&format!("{},{},{},{}\n", epoch + 1, self.train_loss[epoch], val, self.seconds[epoch]));
        }
        out
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut file = std::fs::File::create(path)?;
        file.write_all(self.to_csv().as_bytes())?;
        Ok(())
    }
}

/// Mean of `train + val` proportion losses over the final `last_k` epochs.
/// Missing validation contributes nothing.
pub fn validation_score(history: &TrainHistory, last_k: usize) -> Result<f64> {
    let len = history.len();
    if last_k == 0 {
        return Err(LlpError::InvalidArguments("last_k must be >= 1".into()));
    }
    if last_k > len {
        return Err(LlpError::KTooLarge { last_k, len });
    }
    let total: f64 = (len - last_k..len)
        .map(|e| history.train_loss[e] + history.val_loss[e].unwrap_or(0.0))
        .sum();
    Ok(total / last_k as f64)
}

/// Mean proportion loss over bags of `data` (labels enter only through the
/// bag proportions).
pub fn mean_bag_loss(
    params: &ModelParams,
    data: &LabeledDataset,
    plan: &BagPlan,
    objective: &Objective,
) -> Result<f64> {
    let bags = make_bags(data, plan)?;
    let mut total = 0.0;
    for bag in &bags {
        let traces = bag.indices().iter().map(|&i| forward(params, data.feature(i))).collect::<Result<Vec<_>>>()?;
        let rho_tilde = aggregate_predictions(&traces)?;
        total += objective.proportion_terms(bag.proportion().as_slice(), rho_tilde.as_slice()).0;
    }
    Ok(total / bags.len() as f64)
}

/// Train a fresh model on bags of `dataset`, rebuilt every epoch.
pub fn train(dataset: &LabeledDataset, val: &LabeledDataset, config: &TrainConfig) -> Result<(ModelParams, TrainHistory)> {
    config.validate()?;
    if dataset.is_empty() {
        return Err(LlpError::EmptyDataset);
    }
    if !val.is_empty() && val.dim() != dataset.dim() {
        return Err(LlpError::DimensionMismatch { expected: dataset.dim(), got: val.dim() });
    }
    let objective = config.objective()?;
    let seed = config.run_seed();
    let mut params = ModelParams::init(
        config.arch,
        dataset.dim(),
        config.hidden,
        dataset.num_classes(),
        seed.derive(STREAM_INIT),
    )?;
    let mut optimizer = Optimizer::new(config.optimizer, config.learning_rate, params.len());
    let clip = config.effective_clip_norm();
    let mut history = TrainHistory::default();

    for epoch in 0..config.epochs {
        let started = Instant::now();
        let plan = BagPlan::new(config.bag_size, seed.derive(STREAM_TRAIN_BAGS).derive(epoch as u64))?
            .keep_partial(config.keep_partial);
        let bags = make_bags(dataset, &plan)?;
        let mut sum = 0.0;
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for (step, bag) in bags.iter().enumerate() {
            let instances: Vec<&[f64]> = bag.indices().iter().map(|&i| dataset.feature(i)).collect();
            let mut out = backward(&params, &instances, bag.proportion(), &objective)?;
            let finite_loss = out.proportion_loss.is_finite() && out.loss.is_finite();
            if (!finite_loss && config.loss != LossKind::Dllp) || out.grad.as_slice().iter().any(|g| !g.is_finite()) {
                return Err(LlpError::DivergedLoss { epoch: epoch + 1, step: step + 1 });
            }
            if let Some(max_norm) = clip {
                clip_global_norm(&mut out.grad, max_norm);
            }
            optimizer.step(&mut params, &out.grad);
            sum += out.proportion_loss;
            lo = lo.min(out.proportion_loss);
            hi = hi.max(out.proportion_loss);
        }
        history.train_loss.push(sum / bags.len() as f64);
        history.bag_loss_min.push(lo);
        history.bag_loss_max.push(hi);

        let val_loss = if val.is_empty() {
            None
        } else {
            let plan = BagPlan::new(config.bag_size, seed.derive(STREAM_VAL_BAGS).derive(epoch as u64))?
                .keep_partial(true);
            Some(mean_bag_loss(&params, val, &plan, &objective)?)
        };
        history.val_loss.push(val_loss);
        history.seconds.push(if config.timing { started.elapsed().as_secs_f64() } else { 0.0 });
    }
    Ok((params, history))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bagging::gen_blobs;

    fn history(train: &[f64], val: &[f64]) -> TrainHistory {
        TrainHistory {
            train_loss: train.to_vec(),
            val_loss: val.iter().map(|&v| Some(v)).collect(),
            seconds: vec![0.0; train.len()],
            bag_loss_min: vec![0.0; train.len()],
            bag_loss_max: vec![0.0; train.len()],
        }
    }

    #[test]
    fn validation_score_examples() {
        let h = history(&[0.7; 5], &[0.7; 5]);
        assert!((validation_score(&h, 3).unwrap() - 1.4).abs() < 1e-12);
        let h = history(&[1.0, 0.5], &[0.8, 0.4]);
        assert!((validation_score(&h, 1).unwrap() - 0.9).abs() < 1e-12);
        assert!((validation_score(&h, 2).unwrap() - 1.35).abs() < 1e-12);
        assert!(matches!(validation_score(&h, 3), Err(LlpError::KTooLarge { last_k: 3, len: 2 })));
    }

    #[test]
    fn config_validation() {
        let ok = TrainConfig::default();
        assert!(ok.validate().is_ok());
        for bad in [
            TrainConfig { alpha: 0.0, ..ok.clone() },
            TrainConfig { epochs: 0, ..ok.clone() },
            TrainConfig { learning_rate: 0.0, ..ok.clone() },
            TrainConfig { bag_size: 0, ..ok.clone() },
            TrainConfig { lambda: -1.0, ..ok.clone() },
        ] {
            assert!(matches!(bad.validate(), Err(LlpError::Config(_))));
        }
    }

    #[test]
    fn clip_policy() {
        let tv = TrainConfig::default();
        assert_eq!(tv.effective_clip_norm(), None);
        let dllp = TrainConfig { loss: LossKind::Dllp, ..tv.clone() };
        assert_eq!(dllp.effective_clip_norm(), Some(10.0));
        assert_eq!(TrainConfig { clip_norm: Some(0.0), ..dllp }.effective_clip_norm(), None);
    }

    #[test]
    fn history_lengths_and_csv() {
        let data = gen_blobs(20, 2, 2, 4.0, RngSeed(1)).unwrap();
        let config = TrainConfig { epochs: 3, bag_size: 4, timing: false, ..Default::default() };
        let (_, h) = train(&data, &LabeledDataset::empty(2).unwrap(), &config).unwrap();
        assert_eq!(h.len(), 3);
        assert_eq!(h.val_loss, vec![None; 3]);
        let csv = h.to_csv();
        assert!(csv.starts_with("epoch,train_loss,val_loss,seconds\n1,"));
        assert_eq!(csv.lines().count(), 4);
    }
}
