use thiserror::Error;

/// Errors surfaced by the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// Too few observations to produce the requested statistic.
    #[error("insufficient data: {0}")]
    InsufficientData(String),

    /// A Monte Carlo density run exhausted its sample budget without a
    /// single hit. `upper_bound` is the 95% confidence upper bound on the
    /// density (rule of three).
    #[error("zero density after {samples} samples (95% upper bound {upper_bound:.3e})")]
    ZeroDensity { samples: u64, upper_bound: f64 },

    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
