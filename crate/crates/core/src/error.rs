//! Error type shared by all modules.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// Input violates a documented precondition.
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// Constant or near-constant data where variation is required.
    #[error("degenerate input: {0}")]
    DegenerateInput(String),

    /// Requested time falls outside the trajectory span.
    #[error("time {time:.6} s outside trajectory span [{start:.6}, {end:.6}] s")]
    TimeOutOfRange { time: f64, start: f64, end: f64 },

    /// Point configuration too degenerate for model estimation.
    #[error("degenerate configuration: {0}")]
    DegenerateConfiguration(String),

    /// A matrix factorization failed beyond recovery.
    #[error("numerical failure: {0}")]
    Numerical(String),

    /// RANSAC could not find a model with enough inliers.
    #[error("filter failure: {0}")]
    FilterFailure(String),

    /// Too few matches to run model estimation at all.
    #[error("insufficient matches: got {got}, need {need}")]
    InsufficientMatches { got: usize, need: usize },

    /// File parsing failure.
    #[error("parse error in {path}: {message}")]
    Parse { path: String, message: String },

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}
