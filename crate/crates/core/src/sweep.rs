//! One-axis hyperparameter sweeps: independent seeded runs per value,
//! scored on a labeled test split.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dataset::LabeledDataset;
use crate::error::{LlpError, Result};
use crate::metrics::evaluate;
use crate::trainer::{train, TrainConfig};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SweepAxis {
    BagSize,
    Alpha,
    Lambda,
}

impl std::str::FromStr for SweepAxis {
    type Err = LlpError;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().replace('_', "-").as_str() {
            "bag-size" | "bagsize" => Ok(SweepAxis::BagSize),
            "alpha" => Ok(SweepAxis::Alpha),
            "lambda" => Ok(SweepAxis::Lambda),
            other => Err(LlpError::Config(format!("unknown sweep axis `{other}`"))),
        }
    }
}

impl SweepAxis {
    /// `base` with this axis set to `value`.
    pub fn apply(self, base: &TrainConfig, value: f64) -> Result<TrainConfig> {
        let mut config = base.clone();
        match self {
            SweepAxis::BagSize => {
                if !(value >= 1.0) || value.fract() != 0.0 {
                    return Err(LlpError::Config(format!("bag size must be a positive integer, got {value}")));
                }
                config.bag_size = value as usize;
            }
            SweepAxis::Alpha => config.alpha = value,
            SweepAxis::Lambda => config.lambda = value,
        }
        config.validate()?;
        Ok(config)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub value: f64,
    pub seed: u64,
    pub w_p: f64,
    pub w_r: f64,
    pub w_f1: f64,
}

pub const SWEEP_CSV_HEADER: &str = "value,seed,w_p,w_r,w_f1";

pub fn rows_to_csv(rows: &[SweepRow]) -> String {
    let mut out = format!("{SWEEP_CSV_HEADER}\n");
    for r in rows {
        out.push_str(&format!("{},{},{},{},{}\n", r.value, r.seed, r.w_p, r.w_r, r.w_f1));
    }
    out
}

/// Seeds `base.seed, base.seed + 1, ...`, one full training run per
/// `(value, seed)`. Rows come back ordered by value then seed regardless of
/// `jobs` (worker threads; 0 lets rayon decide).
pub fn sweep(
    dataset: &LabeledDataset,
    val: &LabeledDataset,
    test: &LabeledDataset,
    base: &TrainConfig,
    axis: SweepAxis,
    values: &[f64],
    seeds: usize,
    jobs: usize,
) -> Result<Vec<SweepRow>> {
    if values.is_empty() {
        return Err(LlpError::InvalidArguments("sweep needs at least one value".into()));
    }
    if seeds == 0 {
        return Err(LlpError::InvalidArguments("sweep needs at least one seed".into()));
    }
    let mut trials = Vec::with_capacity(values.len() * seeds);
    for &value in values {
        for s in 0..seeds as u64 {
            let mut config = axis.apply(base, value)?;
            config.seed = base.seed.wrapping_add(s);
            trials.push((value, config));
        }
    }
    let run = |(value, config): &(f64, TrainConfig)| -> Result<SweepRow> {
        let (params, _) = train(dataset, val, config)?;
        let report = evaluate(&params, test)?;
        Ok(SweepRow { value: *value, seed: config.seed, w_p: report.w_precision, w_r: report.w_recall, w_f1: report.w_f1 })
    };
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .map_err(|e| LlpError::InvalidArguments(e.to_string()))?;
    pool.install(|| trials.par_iter().map(run).collect())
}

/// Mean W-F1 per distinct value, in first-seen order.
pub fn mean_f1_by_value(rows: &[SweepRow]) -> Vec<(f64, f64)> {
    let mut out: Vec<(f64, f64, usize)> = Vec::new();
    for r in rows {
        match out.iter_mut().find(|(v, _, _)| *v == r.value) {
            Some(entry) => {
                entry.1 += r.w_f1;
                entry.2 += 1;
            }
            None => out.push((r.value, r.w_f1, 1)),
        }
    }
    out.into_iter().map(|(v, s, n)| (v, s / n as f64)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn axis_parsing_and_application() {
        assert_eq!("bag-size".parse::<SweepAxis>().unwrap(), SweepAxis::BagSize);
        let base = TrainConfig::default();
        assert_eq!(SweepAxis::BagSize.apply(&base, 8.0).unwrap().bag_size, 8);
        assert!(SweepAxis::BagSize.apply(&base, 2.5).is_err());
        assert!(SweepAxis::Alpha.apply(&base, 0.0).is_err());
        assert_eq!(SweepAxis::Lambda.apply(&base, 0.5).unwrap().lambda, 0.5);
    }

    #[test]
    fn mean_grouping() {
        let row = |value, w_f1| SweepRow { value, seed: 0, w_p: 0.0, w_r: 0.0, w_f1 };
        let means = mean_f1_by_value(&[row(2.0, 0.5), row(4.0, 1.0), row(2.0, 0.7)]);
        assert_eq!(means.len(), 2);
        assert!((means[0].1 - 0.6).abs() < 1e-12);
    }
}
