use thiserror::Error;

/// Errors produced by the library.
#[derive(Debug, Clone, Error)]
pub enum Error {
    /// Two nodes coincide within the distinctness tolerance. The caller
    /// should switch to the degenerate (tied-value) test path.
    #[error("degenerate nodes: minimum pairwise gap {gap:.3e} is below tolerance {tol:.3e}")]
    DegenerateNodes { gap: f64, tol: f64 },

    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },

    #[error("not a probability vector: {0}")]
    NotAProbabilityVector(String),

    #[error("invalid partition: {0}")]
    InvalidPartition(String),

    #[error("invalid shape: {0}")]
    InvalidShape(String),

    #[error("empty sample")]
    EmptySample,

    #[error("requested distance {target} is infeasible for this reference")]
    InfeasibleDistance { target: f64 },

    #[error("configuration error: {0}")]
    Config(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

pub type Result<T> = std::result::Result<T, Error>;
