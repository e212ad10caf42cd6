use std::io;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid shape {0:?}: every extent must be at least 1")]
    InvalidShape(Vec<usize>),
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error("index out of bounds: {0}")]
    OutOfBounds(String),
    #[error("invalid range [{lo}, {hi})")]
    InvalidRange { lo: f64, hi: f64 },
    #[error("label {label} outside 1..={classes}")]
    InvalidLabel { label: usize, classes: usize },
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("invalid radius {radius} for {width}x{height} scene")]
    InvalidRadius { radius: usize, width: usize, height: usize },
    #[error("empty input: {0}")]
    EmptyInput(String),
    #[error("infeasible split: {0}")]
    InfeasibleSplit(String),
    #[error("malformed file: {0}")]
    Format(String),
    #[error("payload size mismatch: expected {expected} bytes, found {found}")]
    SizeMismatch { expected: usize, found: usize },
    #[error("dimension mismatch between cube {cube:?} and labels {labels:?}")]
    DimensionMismatch { cube: (usize, usize), labels: (usize, usize) },
    #[error("augmentation budget inconsistent with sample counts: {0}")]
    Budget(String),
    #[error("unpaired comparison: {0}")]
    Unpaired(String),
    #[error(transparent)]
    Io(#[from] io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}
