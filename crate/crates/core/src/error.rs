use thiserror::Error;

/// Errors produced anywhere in the toolkit.
#[derive(Debug, Error)]
pub enum Error {
    #[error("contract violation: {0}")]
    Contract(String),

    #[error("numeric failure: {0}")]
    Numeric(String),

    #[error("no valid sector: {0}")]
    NoValidSector(String),

    #[error("hypothesis violated: {0}")]
    HypothesisViolated(String),

    #[error("boundary solve failed at t = {t}: {detail}")]
    BoundarySolve { t: f64, detail: String },

    #[error("blow-up at t = {t}: max|u| = {max_abs:e}")]
    BlowUp { t: f64, max_abs: f64 },

    #[error("fit unavailable: {0}")]
    FitUnavailable(String),

    #[error("config error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Process exit code used by the CLI for this error class.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::HypothesisViolated(_) | Error::NoValidSector(_) => 2,
            Error::BoundarySolve { .. } | Error::BlowUp { .. } | Error::Numeric(_) => 3,
            Error::Config(_) | Error::Json(_) | Error::Contract(_) => 4,
            Error::FitUnavailable(_) | Error::Io(_) => 3,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
