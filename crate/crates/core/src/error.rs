//! Error type shared across the crate.

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("non-finite value in {0}")]
    NonFinite(String),

    #[error("series too short: need at least {required} observations, got {actual}")]
    SeriesTooShort { required: usize, actual: usize },

    #[error("model not stationary: companion spectral radius {radius}")]
    NotStationary { radius: f64 },

    #[error(
        "tail too thin: n_eff * min(alpha, 1-alpha) = {mass} < 1; \
         use a longer series or an alpha closer to 0.5"
    )]
    TailTooThin { mass: f64 },

    #[error("rank-deficient design: {0}")]
    RankDeficient(String),

    /// Optimizer gave up; `best` is the best point seen so it can still be inspected.
    #[error("solver did not converge after {restarts} restarts (best objective {objective})")]
    NonConvergence {
        restarts: usize,
        objective: f64,
        best: Vec<f64>,
    },

    #[error("cell aborted: {failures} of {replications} replications failed")]
    TooManyFailures { failures: usize, replications: usize },
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidParameter(msg.into())
    }

    pub(crate) fn dim(msg: impl Into<String>) -> Self {
        Error::DimensionMismatch(msg.into())
    }
}
