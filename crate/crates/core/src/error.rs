use thiserror::Error;

use crate::metric::{Level, PointId};

#[derive(Debug, Error)]
pub enum CctError {
    #[error("input error: {0}")]
    Input(String),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("duplicate point: ids {first} and {second}")]
    DuplicatePoint { first: PointId, second: PointId },

    #[error("unknown point id {0}")]
    UnknownPoint(PointId),

    #[error("k = {k} out of range (effective reference size {available})")]
    KOutOfRange { k: usize, available: usize },

    #[error("tree validation failed: {0}")]
    Validation(String),

    #[error("tree/point-set mismatch: {0}")]
    TreeMismatch(String),

    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("contract violation: {0}")]
    Contract(String),

    #[error("traversal failed at (i={i}, j={j}, q={q}): {source}")]
    Traversal {
        i: Level,
        j: Level,
        q: PointId,
        #[source]
        source: Box<CctError>,
    },

    #[error("verification failed: {}", .0.join("; "))]
    Verification(Vec<String>),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl CctError {
    /// Process exit code: 3 for verification failures, 2 for everything else.
    pub fn exit_code(&self) -> i32 {
        match self {
            CctError::Verification(_) => 3,
            CctError::Traversal { source, .. } => source.exit_code(),
            _ => 2,
        }
    }
}

pub type Result<T> = std::result::Result<T, CctError>;
