use std::fmt;

use crate::optim::OptimizerKind;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("coordinate {index} = {value} lies outside [{lo}, {hi}]")]
    OutsideRegion {
        index: usize,
        value: f64,
        lo: f64,
        hi: f64,
    },

    #[error("invalid feasible region: {0}")]
    InvalidRegion(String),

    #[error("invalid hyperparameter `{name}`: {reason}")]
    InvalidHyperParam { name: &'static str, reason: String },

    #[error("optimizer kind mismatch: state belongs to {state}, kernel is {kernel}")]
    KindMismatch {
        state: OptimizerKind,
        kernel: OptimizerKind,
    },

    #[error("numeric failure at step {step}: {what}")]
    NumericFailure { step: u64, what: String },

    #[error("projection weight {index} is not strictly positive ({value})")]
    NonPositiveWeight { index: usize, value: f64 },

    #[error("{0} is not supported by this operation")]
    Unsupported(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("invalid dataset: {0}")]
    InvalidDataset(String),

    #[error("{path}: line {line}: {reason}")]
    Parse {
        path: String,
        line: usize,
        reason: String,
    },

    #[error("{path}: {reason}")]
    Io { path: String, reason: String },

    #[error("hindsight solver stopped after {iterations} iterations with step norm {residual:e}")]
    NoConvergence {
        iterations: usize,
        residual: f64,
        last: Vec<f64>,
    },

    #[error("trace does not carry a dense `{0}` series; rerun with dense retention")]
    MissingSeries(&'static str),

    #[error("checkpoint {checkpoint} outside 1..={horizon}")]
    CheckpointOutOfRange { checkpoint: u64, horizon: u64 },

    #[error("bound term undefined: {0}")]
    UndefinedBound(String),
}

impl Error {
    pub(crate) fn hyper(name: &'static str, reason: impl fmt::Display) -> Self {
        Error::InvalidHyperParam {
            name,
            reason: reason.to_string(),
        }
    }

    pub(crate) fn check_len(expected: usize, got: usize) -> Result<()> {
        if expected == got {
            Ok(())
        } else {
            Err(Error::DimensionMismatch { expected, got })
        }
    }
}
