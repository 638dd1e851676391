use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("invalid model: {0}")]
    InvalidModel(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("value {0} is not present in the indexed table")]
    ValueNotInTable(f64),

    #[error("index {index} out of range for table of {len} entries")]
    IndexOutOfRange { index: usize, len: usize },

    #[error("problem size {n} exceeds engine capacity {n_max}")]
    CapacityExceeded { n: usize, n_max: usize },

    #[error("success probability is zero; the sectional target is unreachable")]
    UnreachableTarget,

    #[error("node {0} is not reachable from the base station")]
    Disconnected(usize),

    #[error("graph too large for exact search: {n} nodes (limit {limit})")]
    TooLarge { n: usize, limit: usize },

    #[error("malformed encoded-J data: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
