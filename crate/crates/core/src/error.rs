use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// A certificate was asked to run outside the step-size range its inequality covers.
    #[error("outside hypothesis: {0}")]
    OutOfHypothesis(String),

    #[error("reference optimum required: {0}")]
    RequiresReference(&'static str),

    #[error(
        "reference solve did not converge after {iterations} iterations (residual {residual:e})"
    )]
    NoReference { iterations: usize, residual: f64 },

    #[error("bracket [{lo}, {hi}] does not contain the minimizer")]
    Bracket { lo: f64, hi: f64 },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidArgument(msg.into())
}
