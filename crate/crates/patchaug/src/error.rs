//! Error types shared across the crate.

use thiserror::Error;

/// Errors produced by dataset handling, transport computations, generation,
/// and training.
#[derive(Debug, Error)]
pub enum Error {
    /// Operand dimensions do not line up (selector vs sequence, point sets of
    /// different width, grid side mismatch, ...).
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    /// A selector violates its structural constraints.
    #[error("invalid selector: {0}")]
    InvalidSelector(String),

    /// A selector family violates its structural constraints.
    #[error("invalid family: {0}")]
    InvalidFamily(String),

    /// A family leaves at least one index uncovered, so reconstruction
    /// would divide by zero.
    #[error("family does not cover index {index}")]
    CoverageZero { index: usize },

    /// Enumerating a subsequence family would exceed the configured cap.
    #[error("enumeration of {requested} selectors exceeds cap {cap}")]
    EnumerationTooLarge { requested: u128, cap: usize },

    /// Exact transport is only defined here for equal-size uniform
    /// empirical marginals.
    #[error("unsupported marginals: {0}")]
    UnsupportedMarginals(String),

    /// Exact assignment was requested for more points than the cap allows.
    #[error("assignment of {size} points exceeds cap {cap}")]
    AssignmentCapExceeded { size: usize, cap: usize },

    /// Invalid configuration value.
    #[error("invalid config: {0}")]
    Config(String),

    /// Malformed input file.
    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    /// A class token that maps to no known class index.
    #[error("unknown class token `{token}` at line {line}")]
    UnknownClass { token: String, line: usize },

    /// A dataset with no rows where at least one is required.
    #[error("empty dataset: {0}")]
    EmptyDataset(String),

    /// A value that must be finite is NaN or infinite.
    #[error("non-finite value: {0}")]
    NonFinite(String),

    /// An optimization produced a non-finite loss.
    #[error("numerical divergence: {0}")]
    Divergence(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Process exit code class used by the CLI: 2 for data errors,
    /// 3 for numerical divergence.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Divergence(_) | Error::NonFinite(_) => 3,
            _ => 2,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
