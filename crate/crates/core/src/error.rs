use std::path::PathBuf;

/// Errors produced by matrix ingestion, preprocessing and the
/// preconditioner construction kernels.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("io error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}:{line}: {msg}")]
    Parse {
        path: PathBuf,
        line: usize,
        msg: String,
    },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("index {index} out of range for dimension {dim}")]
    IndexOutOfRange { index: usize, dim: usize },

    #[error("matrix is structurally singular: maximum transversal has size {matched} < {dim}")]
    StructurallySingular { matched: usize, dim: usize },

    #[error("column {0} of the matrix is structurally zero")]
    ZeroColumn(usize),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("contract violation: {0}")]
    ContractViolation(String),

    #[error("all {0} columns of the preconditioner failed to build")]
    AllColumnsFailed(usize),
}

pub type Result<T> = std::result::Result<T, Error>;
