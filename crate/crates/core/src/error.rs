use thiserror::Error;

/// Errors raised by the optimizer and its building blocks.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("invalid fitness value {value} at sample {index}")]
    InvalidFitness { index: usize, value: f64 },

    /// Non-finite state, failed decomposition or a nonpositive determinant.
    #[error("numerical error: {0}")]
    Numerical(String),

    /// The Fisher metric could not be inverted (an eigenvalue of Σ at or below the floor).
    #[error("singular metric: smallest eigenvalue {min_eigenvalue:e}")]
    SingularMetric { min_eigenvalue: f64 },

    #[error("tell() called without a pending ask()")]
    NoPendingPopulation,
}

impl Error {
    /// Short machine-readable code used in logs and CSV diagnostics.
    pub fn reason_code(&self) -> &'static str {
        match self {
            Error::InvalidArgument(_) => "invalid_argument",
            Error::InvalidFitness { .. } => "invalid_fitness",
            Error::Numerical(_) => "numerical",
            Error::SingularMetric { .. } => "singular_metric",
            Error::NoPendingPopulation => "no_pending_population",
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
