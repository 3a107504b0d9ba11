use std::path::PathBuf;

use thiserror::Error;

/// Errors raised by the models, solvers and the simulation harness.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid scenario: {0}")]
    InvalidScenario(String),

    #[error("degenerate geometry: distance must be positive, got {0}")]
    DegenerateGeometry(f64),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("UAV cannot be reached: {bits} bits assigned over a zero-capacity link")]
    UnreachableUav { bits: f64 },

    #[error("deadline {deadline}s leaves no compute time after {transmit}s of transmission")]
    InfeasibleDeadline { deadline: f64, transmit: f64 },

    #[error("grid oracle supports at most {max} members, coalition has {got}")]
    OracleScaleExceeded { max: usize, got: usize },

    #[error("invalid comparison: {0}")]
    InvalidComparison(String),

    #[error("cannot aggregate an empty set of runs")]
    EmptyAggregate,

    #[error("strategy record rejected: {0}")]
    RecordRejected(String),

    #[error("i/o failure on {path}: {source}")]
    IoFailure {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("malformed JSON: {0}")]
    Json(#[from] serde_json::Error),

    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::IoFailure {
            path: path.into(),
            source,
        }
    }
}
