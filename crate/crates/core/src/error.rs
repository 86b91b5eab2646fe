use std::path::PathBuf;

use thiserror::Error;

/// Errors produced anywhere in the toolkit.
#[derive(Debug, Error)]
pub enum LlpError {
    #[error("component {index} is negative ({value})")]
    NegativeComponent { index: usize, value: f64 },
    #[error("components sum to {sum}, expected 1 within 1e-9")]
    SumNotOne { sum: f64 },
    #[error("at least 2 classes are required, got {0}")]
    TooFewClasses(usize),
    #[error("non-finite input value")]
    NonFiniteInput,
    #[error("bag is empty")]
    EmptyBag,
    #[error("dataset is empty")]
    EmptyDataset,
    #[error("label {label} out of range for {num_classes} classes")]
    LabelOutOfRange { label: usize, num_classes: usize },
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("alpha must be positive, got {0}")]
    NonPositiveAlpha(f64),
    #[error("embedding row {0} has zero norm")]
    ZeroNormEmbedding(usize),
    #[error("loss diverged at epoch {epoch}, step {step}")]
    DivergedLoss { epoch: usize, step: usize },
    #[error("last_k = {last_k} exceeds history length {len}")]
    KTooLarge { last_k: usize, len: usize },
    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },
    #[error("no instances to evaluate")]
    EmptyEvaluation,
    #[error("invalid arguments: {0}")]
    InvalidArguments(String),
    #[error("invalid config: {0}")]
    Config(String),
    #[error("{path}: {message}")]
    Data { path: PathBuf, message: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, LlpError>;
