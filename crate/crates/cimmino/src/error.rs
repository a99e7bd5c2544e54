//! Crate-wide error type.

use thiserror::Error;

/// Errors produced by the solver pipeline and its supporting stages.
#[derive(Debug, Error)]
pub enum Error {
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    /// Matrix Market parse failure, with the 1-based line number.
    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    /// Matrix Market qualifier we deliberately do not handle.
    #[error("unsupported Matrix Market format: {0}")]
    Unsupported(String),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    /// An entry index falls outside the declared shape.
    #[error("index out of bounds: entry ({row}, {col}) in a {nrows}x{ncols} matrix")]
    IndexOutOfBounds {
        row: usize,
        col: usize,
        nrows: usize,
        ncols: usize,
    },

    #[error("invalid permutation: {0}")]
    InvalidPermutation(String),

    #[error("invalid block partition: {0}")]
    InvalidPartition(String),

    /// A reordered matrix violates the block pattern its partition promises.
    #[error("structure violation: {0}")]
    Structure(String),

    /// The Schur-like Gram matrix is numerically singular, so the closed-form
    /// solve cannot recover the solution (rank-deficient augmented matrix).
    #[error("singular Schur matrix: condition estimate {cond:.3e}")]
    SingularSchur { cond: f64 },

    /// Residual of a nominally consistent solve exceeded tolerance: the right
    /// hand side is most likely not in the range of the matrix.
    #[error("consistency check failed: residual {residual:.3e} exceeds {threshold:.3e}")]
    ConsistencyWarning { residual: f64, threshold: f64 },

    #[error("SVD did not converge for row block {block}")]
    SvdNonConvergence { block: usize },

    /// Dense densification refused because the instance exceeds the cap.
    #[error("instance too large for dense verification: {size} > cap {cap}")]
    TooLargeForDense { size: usize, cap: usize },
}

pub type Result<T> = std::result::Result<T, Error>;
