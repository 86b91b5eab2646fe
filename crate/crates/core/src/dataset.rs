//! Labeled feature-vector datasets, bags, and the CSV / JSONL readers.
//!
//! CSV files carry a header `f0,...,f{D-1},label`. JSONL files hold one
//! object per line: `{"features": [..], "label": k}`. Labels are 0-based.

use std::fs::File;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{LlpError, Result};
use crate::simplex::SimplexVector;

#[derive(Debug, Clone, PartialEq)]
pub struct LabeledDataset {
    features: Vec<Vec<f64>>,
    labels: Vec<usize>,
    num_classes: usize,
}

impl LabeledDataset {
    pub fn new(features: Vec<Vec<f64>>, labels: Vec<usize>, num_classes: usize) -> Result<Self> {
        if num_classes < 2 {
            return Err(LlpError::TooFewClasses(num_classes));
        }
        if features.len() != labels.len() {
            return Err(LlpError::LengthMismatch { left: features.len(), right: labels.len() });
        }
        if let Some(first) = features.first() {
            let dim = first.len();
            if dim == 0 {
                return Err(LlpError::DimensionMismatch { expected: 1, got: 0 });
            }
            for row in &features {
                if row.len() != dim {
                    return Err(LlpError::DimensionMismatch { expected: dim, got: row.len() });
                }
                if row.iter().any(|v| !v.is_finite()) {
                    return Err(LlpError::NonFiniteInput);
                }
            }
        }
        if let Some(&label) = labels.iter().find(|&&l| l >= num_classes) {
            return Err(LlpError::LabelOutOfRange { label, num_classes });
        }
        Ok(Self { features, labels, num_classes })
    }

    /// An empty dataset, e.g. a missing validation split.
    pub fn empty(num_classes: usize) -> Result<Self> {
        Self::new(Vec::new(), Vec::new(), num_classes)
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    /// Feature dimension, 0 when empty.
    pub fn dim(&self) -> usize {
        self.features.first().map_or(0, Vec::len)
    }

    pub fn num_classes(&self) -> usize {
        self.num_classes
    }

    pub fn features(&self) -> &[Vec<f64>] {
        &self.features
    }

    pub fn feature(&self, index: usize) -> &[f64] {
        &self.features[index]
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    /// Same instances under a wider class count (e.g. a test split that
    /// happens to lack the highest class).
    pub fn with_num_classes(self, num_classes: usize) -> Result<Self> {
        Self::new(self.features, self.labels, num_classes)
    }

    /// Read CSV or JSONL, chosen by extension (`.jsonl` / `.json` vs anything
    /// else). `num_classes` of `None` infers `max(label) + 1`, at least 2.
    pub fn load(path: &Path, num_classes: Option<usize>) -> Result<Self> {
        let data_err = |message: String| LlpError::Data { path: path.to_path_buf(), message };
        let file = File::open(path).map_err(|e| data_err(e.to_string()))?;
        let is_jsonl = matches!(
            path.extension().and_then(|e| e.to_str()),
            Some("jsonl") | Some("json") | Some("ndjson")
        );
        let (features, labels) = if is_jsonl {
            read_jsonl(BufReader::new(file)).map_err(data_err)?
        } else {
            read_csv(file).map_err(data_err)?
        };
        if labels.is_empty() {
            return Err(data_err("no rows".into()));
        }
        let inferred = labels.iter().max().map_or(2, |m| (m + 1).max(2));
        let num_classes = num_classes.unwrap_or(inferred);
        Self::new(features, labels, num_classes).map_err(|e| data_err(e.to_string()))
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut writer = csv::Writer::from_path(path)?;
        let mut header: Vec<String> = (0..self.dim()).map(|i| format!("f{i}")).collect();
        header.push("label".into());
        writer.write_record(&header)?;
        for (row, label) in self.features.iter().zip(&self.labels) {
            let mut record: Vec<String> = row.iter().map(|v| v.to_string()).collect();
            record.push(label.to_string());
            writer.write_record(&record)?;
        }
        writer.flush()?;
        Ok(())
    }

    pub fn write_jsonl(&self, path: &Path) -> Result<()> {
        let mut out = std::io::BufWriter::new(File::create(path)?);
        for (row, &label) in self.features.iter().zip(&self.labels) {
            let line = serde_json::to_string(&JsonRow { features: row.clone(), label })?;
            writeln!(out, "{line}")?;
        }
        out.flush()?;
        Ok(())
    }
}

#[derive(Serialize, Deserialize)]
struct JsonRow {
    features: Vec<f64>,
    label: usize,
}

type Rows = (Vec<Vec<f64>>, Vec<usize>);

fn read_csv<R: std::io::Read>(reader: R) -> std::result::Result<Rows, String> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
    let headers = rdr.headers().map_err(|e| e.to_string())?.clone();
    let label_col = headers
        .iter()
        .position(|h| h == "label")
        .ok_or_else(|| "missing `label` column".to_string())?;
    let mut features = Vec::new();
    let mut labels = Vec::new();
    for (line, record) in rdr.records().enumerate() {
        let record = record.map_err(|e| e.to_string())?;
        let mut row = Vec::with_capacity(record.len().saturating_sub(1));
        for (col, field) in record.iter().enumerate() {
            if col == label_col {
                let label = field
                    .parse::<usize>()
                    .map_err(|_| format!("row {}: bad label `{field}`", line + 1))?;
                labels.push(label);
            } else {
                let value = field
                    .parse::<f64>()
                    .map_err(|_| format!("row {}: bad feature `{field}`", line + 1))?;
                row.push(value);
            }
        }
        features.push(row);
    }
    Ok((features, labels))
}

fn read_jsonl<R: BufRead>(reader: R) -> std::result::Result<Rows, String> {
    let mut features = Vec::new();
    let mut labels = Vec::new();
    for (line_no, line) in reader.lines().enumerate() {
        let line = line.map_err(|e| e.to_string())?;
        if line.trim().is_empty() {
            continue;
        }
        let row: JsonRow =
            serde_json::from_str(&line).map_err(|e| format!("line {}: {e}", line_no + 1))?;
        features.push(row.features);
        labels.push(row.label);
    }
    Ok((features, labels))
}

/// A group of instances (indices into a [`LabeledDataset`]) with the class
/// histogram of their labels.
#[derive(Debug, Clone, PartialEq)]
pub struct Bag {
    instance_indices: Vec<usize>,
    proportion: SimplexVector,
}

impl Bag {
    /// Build a bag, computing its proportion from the dataset labels.
    pub fn from_indices(dataset: &LabeledDataset, instance_indices: Vec<usize>) -> Result<Self> {
        let labels: Vec<usize> = instance_indices
            .iter()
            .map(|&i| {
                dataset
                    .labels
                    .get(i)
                    .copied()
                    .ok_or(LlpError::LengthMismatch { left: i, right: dataset.len() })
            })
            .collect::<Result<_>>()?;
        let proportion = crate::bagging::bag_proportions(&labels, dataset.num_classes())?;
        Ok(Self { instance_indices, proportion })
    }

    pub fn indices(&self) -> &[usize] {
        &self.instance_indices
    }

    pub fn proportion(&self) -> &SimplexVector {
        &self.proportion
    }

    pub fn len(&self) -> usize {
        self.instance_indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.instance_indices.is_empty()
    }

    /// Re-check that the proportion equals the label histogram divided by
    /// `|B|`, in integer arithmetic: `proportion[c] * |B|` must round to the
    /// count and be within float error of it.
    pub fn proportion_matches(&self, dataset: &LabeledDataset) -> bool {
        let n = self.len();
        if n == 0 {
            return false;
        }
        let mut counts = vec![0usize; dataset.num_classes()];
        for &i in &self.instance_indices {
            counts[dataset.labels[i]] += 1;
        }
        if counts.iter().sum::<usize>() != n {
            return false;
        }
        counts.iter().zip(self.proportion.as_slice()).all(|(&count, &p)| {
            let scaled = p * n as f64;
            scaled.round() as usize == count && (scaled - count as f64).abs() <= 1e-9
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_ragged_rows_and_bad_labels() {
        assert!(matches!(
            LabeledDataset::new(vec![vec![1.0, 2.0], vec![1.0]], vec![0, 1], 2),
            Err(LlpError::DimensionMismatch { .. })
        ));
        assert!(matches!(
            LabeledDataset::new(vec![vec![1.0]], vec![2], 2),
            Err(LlpError::LabelOutOfRange { label: 2, .. })
        ));
    }

    #[test]
    fn csv_and_jsonl_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let ds = LabeledDataset::new(
            vec![vec![0.1, -2.5], vec![3.0, 1e-7], vec![0.0, 4.25]],
            vec![0, 2, 1],
            3,
        )
        .unwrap();
        let csv_path = dir.path().join("d.csv");
        ds.write_csv(&csv_path).unwrap();
        assert_eq!(LabeledDataset::load(&csv_path, None).unwrap(), ds);
        let jsonl_path = dir.path().join("d.jsonl");
        ds.write_jsonl(&jsonl_path).unwrap();
        assert_eq!(LabeledDataset::load(&jsonl_path, None).unwrap(), ds);
    }

    #[test]
    fn load_reports_path_on_missing_file() {
        let err = LabeledDataset::load(Path::new("/nonexistent/blobs.csv"), None).unwrap_err();
        assert!(err.to_string().contains("/nonexistent/blobs.csv"));
    }

    #[test]
    fn csv_without_label_column_is_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("x.csv");
        std::fs::write(&path, "f0,f1\n1,2\n").unwrap();
        let err = LabeledDataset::load(&path, None).unwrap_err();
        assert!(err.to_string().contains("label"));
    }

    #[test]
    fn bag_proportion_is_label_histogram() {
        let ds = LabeledDataset::new(vec![vec![0.0]; 4], vec![0, 1, 1, 1], 2).unwrap();
        let bag = Bag::from_indices(&ds, vec![0, 1, 2, 3]).unwrap();
        assert_eq!(bag.proportion().as_slice(), &[0.25, 0.75]);
        assert!(bag.proportion_matches(&ds));
    }
}
