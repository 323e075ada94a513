use thiserror::Error;

/// Errors produced by the simulator.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// The covariance matrix is asymmetric, mis-sized or violates the
    /// uncertainty bound.
    #[error("invalid state: {0}")]
    InvalidState(String),

    #[error("invalid sampling plan: {0}")]
    InvalidPlan(String),

    #[error("degenerate conditioning: witness variance {variance:e} is below {threshold:e}")]
    DegenerateConditioning { variance: f64, threshold: f64 },

    #[error("provenance mismatch: {0}")]
    ProvenanceMismatch(String),

    #[error("invalid config: {0}")]
    InvalidConfig(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
