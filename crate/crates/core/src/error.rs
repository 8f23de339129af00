use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dataset contains no trajectories")]
    Empty,
    #[error("trajectory {id} has {len} points, expected {expected}")]
    NonUniformLength { id: u64, len: usize, expected: usize },
    #[error("trajectory {id} has {len} points, at least 4 are required")]
    TooShort { id: u64, len: usize },
    #[error("non-finite coordinate in {context}")]
    NonFinite { context: String },
    #[error("parameter {value} outside [0, 1]")]
    Domain { value: f64 },
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("chained seeding requires the previous segment")]
    MissingPredecessor,
    #[error("{len} points per trajectory is incompatible with {grouping} grouping")]
    IncompatibleLength { len: usize, grouping: &'static str },
    #[error("shape mismatch: expected {expected}, got {actual}")]
    ShapeMismatch { expected: usize, actual: usize },
    #[error("dense expansion of {blocks} blocks exceeds the cap of {cap}")]
    AllocationLimit { blocks: usize, cap: usize },
    #[error("segments sampled with different tick counts ({expected} vs {actual})")]
    InconsistentTicks { expected: usize, actual: usize },
    #[error("{path}:{line}: {message}")]
    Parse {
        path: PathBuf,
        line: u64,
        message: String,
    },
    #[error("{path}: trajectory {id} is missing point index {missing}")]
    Gap {
        path: PathBuf,
        id: u64,
        missing: usize,
    },
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}
