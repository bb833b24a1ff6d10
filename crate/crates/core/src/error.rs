use std::path::PathBuf;

use crate::fitting::FitResult;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// Invalid parameter or argument value.
    #[error("domain error: {0}")]
    Domain(String),

    /// The integrator or a solver left its region of validity.
    #[error("numerical error: {0}")]
    Numerical(String),

    #[error("time {0} is not a sample time of the trajectory")]
    Lookup(f64),

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    /// The input data violates a precondition (non-monotone series, bad values).
    #[error("data error: {0}")]
    Data(String),

    /// No restart converged. Carries the best-effort result.
    #[error("no restart converged (best rmse {:.4})", .best.rmse)]
    Convergence { best: Box<FitResult> },

    #[error(
        "ingestion error: {malformed} of {rows} rows malformed, above the 1% threshold; samples: {samples:?}"
    )]
    Ingestion {
        rows: usize,
        malformed: usize,
        samples: Vec<String>,
    },

    #[error("schema error: {0}")]
    Schema(String),

    #[error("file not found: {}", .0.display())]
    FileNotFound(PathBuf),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Process exit code: 1 usage/schema, 2 data quality, 3 numerical failure.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Domain(_)
            | Error::Lookup(_)
            | Error::Schema(_)
            | Error::FileNotFound(_)
            | Error::Io(_)
            | Error::Json(_) => 1,
            Error::Csv(_) | Error::InsufficientData(_) | Error::Data(_) | Error::Ingestion { .. } => 2,
            Error::Numerical(_) | Error::Convergence { .. } => 3,
        }
    }
}

pub(crate) fn domain(msg: impl Into<String>) -> Error {
    Error::Domain(msg.into())
}
