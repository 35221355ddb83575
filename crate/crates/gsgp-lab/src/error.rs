//! Crate-wide error type.

use std::path::PathBuf;
use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("variable x{index} out of range for {dims}-dimensional inputs")]
    DimensionMismatch { index: usize, dims: usize },

    #[error("{name} is undefined at {point:?}: {reason}")]
    Domain {
        name: String,
        point: Vec<f64>,
        reason: String,
    },

    #[error("sample id {got} invalid for {name}: expected {expected}")]
    InvalidSampleId {
        name: String,
        got: u32,
        expected: &'static str,
    },

    #[error("noise level {0} outside [0, 1]")]
    InvalidNoiseLevel(f64),

    #[error("noise injection is defined for training partitions only")]
    NoiseOnTestPartition,

    #[error("targets have zero dispersion; NRMSE is undefined")]
    DegenerateTargets,

    #[error("vectors of length {left} and {right} cannot be compared")]
    LengthMismatch { left: usize, right: usize },

    #[error("need at least {min} instances, got {got}")]
    TooFewInstances { got: usize, min: usize },

    #[error("empty input: {0}")]
    EmptyInput(&'static str),

    #[error("need at least {min} nonzero differences, found {found}")]
    TooFewNonzeroDifferences { found: usize, min: usize },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("unknown dataset `{0}`")]
    UnknownDataset(String),

    #[error("malformed plan: {0}")]
    MalformedPlan(String),

    #[error("duplicate experiment cell {0}")]
    DuplicateCell(String),

    #[error("no 0% noise baseline for {0}")]
    MissingBaseline(String),

    #[error("incomplete records: {0}")]
    IncompleteRecords(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// Coarse category used by the CLI to prefix its exit messages.
    pub fn category(&self) -> &'static str {
        match self {
            Error::DimensionMismatch { .. } | Error::Domain { .. } => "eval",
            Error::InvalidSampleId { .. }
            | Error::InvalidNoiseLevel(_)
            | Error::NoiseOnTestPartition
            | Error::UnknownDataset(_) => "data",
            Error::DegenerateTargets
            | Error::LengthMismatch { .. }
            | Error::TooFewInstances { .. }
            | Error::EmptyInput(_)
            | Error::TooFewNonzeroDifferences { .. } => "stats",
            Error::InvalidConfig(_)
            | Error::MalformedPlan(_)
            | Error::DuplicateCell(_) => "config",
            Error::MissingBaseline(_) | Error::IncompleteRecords(_) => "analysis",
            Error::Io { .. } | Error::Csv(_) => "io",
        }
    }
}
