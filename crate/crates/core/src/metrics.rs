//! Instance-level evaluation: confusion matrix and support-weighted
//! precision, recall and F1.

use serde::{Deserialize, Serialize};

use crate::dataset::LabeledDataset;
use crate::error::{LlpError, Result};
use crate::model::{predict, ModelParams};

/// `counts[i][j]` = instances of true class `i` predicted as `j`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfusionMatrix {
    counts: Vec<Vec<u64>>,
}

impl ConfusionMatrix {
    pub fn from_counts(counts: Vec<Vec<u64>>) -> Result<Self> {
        let c = counts.len();
        if let Some(row) = counts.iter().find(|r| r.len() != c) {
            return Err(LlpError::DimensionMismatch { expected: c, got: row.len() });
        }
        Ok(Self { counts })
    }

    pub fn counts(&self) -> &[Vec<u64>] {
        &self.counts
    }

    pub fn num_classes(&self) -> usize {
        self.counts.len()
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().flatten().sum()
    }
}

pub fn confusion(y_true: &[usize], y_pred: &[usize], num_classes: usize) -> Result<ConfusionMatrix> {
    if y_true.len() != y_pred.len() {
        return Err(LlpError::LengthMismatch { left: y_true.len(), right: y_pred.len() });
    }
    let mut counts = vec![vec![0u64; num_classes]; num_classes];
    for (&t, &p) in y_true.iter().zip(y_pred) {
        for label in [t, p] {
            if label >= num_classes {
                return Err(LlpError::LabelOutOfRange { label, num_classes });
            }
        }
        counts[t][p] += 1;
    }
    Ok(ConfusionMatrix { counts })
}

/// Weighted precision / recall / F1.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub w_precision: f64,
    pub w_recall: f64,
    pub w_f1: f64,
    pub confusion: ConfusionMatrix,
}

impl MetricsReport {
    pub const CSV_HEADER: &'static str = "w_p,w_r,w_f1";

    pub fn csv_row(&self) -> String {
        format!("{},{},{}", self.w_precision, self.w_recall, self.w_f1)
    }
}

fn ratio(num: u64, den: u64) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}

/// Per-class scores averaged with weights `support_c / N`. Undefined
/// per-class precision or recall counts as 0.
pub fn weighted_prf(cm: &ConfusionMatrix) -> Result<(f64, f64, f64)> {
    let total = cm.total();
    if total == 0 {
        return Err(LlpError::EmptyEvaluation);
    }
    let c = cm.num_classes();
    let (mut wp, mut wr, mut wf) = (0.0, 0.0, 0.0);
    for k in 0..c {
        let tp = cm.counts[k][k];
        let support: u64 = cm.counts[k].iter().sum();
        let predicted: u64 = cm.counts.iter().map(|row| row[k]).sum();
        let precision = ratio(tp, predicted);
        let recall = ratio(tp, support);
        let f1 = if precision + recall == 0.0 { 0.0 } else { 2.0 * precision * recall / (precision + recall) };
        let weight = support as f64 / total as f64;
        wp += weight * precision;
        wr += weight * recall;
        wf += weight * f1;
    }
    Ok((wp, wr, wf))
}

/// Predict every instance of `test` and score it.
pub fn evaluate(params: &ModelParams, test: &LabeledDataset) -> Result<MetricsReport> {
    if test.dim() != params.input_dim() && !test.is_empty() {
        return Err(LlpError::DimensionMismatch { expected: params.input_dim(), got: test.dim() });
    }
    let y_pred = test.features().iter().map(|x| predict(params, x)).collect::<Result<Vec<_>>>()?;
    let cm = confusion(test.labels(), &y_pred, params.num_classes().max(test.num_classes()))?;
    let (w_precision, w_recall, w_f1) = weighted_prf(&cm)?;
    Ok(MetricsReport { w_precision, w_recall, w_f1, confusion: cm })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn confusion_examples() {
        assert_eq!(confusion(&[0, 1], &[0, 1], 2).unwrap().counts(), &[vec![1, 0], vec![0, 1]]);
        assert_eq!(
            confusion(&[0, 0, 0, 1, 1, 1], &[0, 0, 1, 1, 1, 1], 2).unwrap().counts(),
            &[vec![2, 1], vec![0, 3]]
        );
        assert_eq!(confusion(&[], &[], 3).unwrap().total(), 0);
    }

    #[test]
    fn confusion_errors() {
        assert!(matches!(confusion(&[0], &[], 2), Err(LlpError::LengthMismatch { .. })));
        assert!(matches!(confusion(&[0], &[5], 2), Err(LlpError::LabelOutOfRange { label: 5, .. })));
    }

    #[test]
    fn weighted_examples() {
        let cm = confusion(&[0, 1, 2, 1], &[0, 1, 2, 1], 3).unwrap();
        assert_eq!(weighted_prf(&cm).unwrap(), (1.0, 1.0, 1.0));
        let cm = ConfusionMatrix::from_counts(vec![vec![2, 1], vec![0, 3]]).unwrap();
        let (p, r, f) = weighted_prf(&cm).unwrap();
        assert!((p - 0.875).abs() < 1e-12);
        assert!((r - 0.833_333_333_333_333_3).abs() < 1e-12);
        assert!((f - 0.828_571_428_571_428_5).abs() < 1e-12);
        let cm = confusion(&[0, 0, 1, 1], &[1, 1, 1, 1], 2).unwrap();
        let (p, r, _) = weighted_prf(&cm).unwrap();
        assert_eq!(r, 0.5);
        assert_eq!(p, 0.25);
    }

    #[test]
    fn empty_evaluation_is_an_error() {
        let cm = confusion(&[], &[], 2).unwrap();
        assert!(matches!(weighted_prf(&cm), Err(LlpError::EmptyEvaluation)));
    }
}
