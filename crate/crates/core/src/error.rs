use std::path::PathBuf;

use crate::matrix::Axis;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("{axis} index {index} out of range for length {len}")]
    IndexOutOfRange { axis: Axis, index: usize, len: usize },

    #[error("duplicate {axis} index {index} in block")]
    DuplicateIndex { axis: Axis, index: usize },

    #[error("operation requires a nonzero matrix")]
    ZeroMatrix,

    #[error("non-finite entry at ({row}, {col})")]
    NonFinite { row: usize, col: usize },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("{axis} block {block} has zero Frobenius norm and can never be selected")]
    ZeroBlock { axis: Axis, block: usize },

    #[error("no residual possible: A has full row rank, so null(A^T) = {{0}}")]
    NoResidualPossible,

    #[error("the stopping rule needs the reference solution A^+ b, but the problem has none")]
    MissingOracle,

    #[error("{path}:{line}: {msg}")]
    Parse {
        path: PathBuf,
        line: usize,
        msg: String,
    },

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
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }

    pub(crate) fn check_len(expected: usize, got: usize) -> Result<()> {
        if expected == got {
            Ok(())
        } else {
            Err(Error::DimensionMismatch { expected, got })
        }
    }
}
