//! Error type shared by every module of the crate.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// Broad failure class, used by front ends to pick an exit status.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorKind {
    Validation,
    Numerical,
    Io,
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("unknown variable `{0}`")]
    UnknownVariable(String),

    #[error("variable `{variable}`: category `{category}` has no quantification")]
    MissingQuantification { variable: String, category: String },

    #[error("variable `{variable}`: category `{category}` is not declared")]
    UnknownCategory { variable: String, category: String },

    #[error("variable `{variable}`: category `{category}` was not observed when the model was fitted")]
    UnseenCategory { variable: String, category: String },

    #[error("invalid dataset: {0}")]
    InvalidDataset(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("row {row}, column `{column}`: {message}")]
    InvalidCell {
        row: usize,
        column: String,
        message: String,
    },

    #[error("language `{0}` is missing from the gearing table")]
    UnknownLanguage(String),

    #[error("not enough observations: need more than {needed}, got {got}")]
    InsufficientObservations { needed: usize, got: usize },

    #[error("design matrix is rank deficient (singular value ratio {ratio:.3e})")]
    RankDeficient { ratio: f64 },

    #[error("{0} has zero variance")]
    ZeroVariance(String),

    #[error("{0} did not converge")]
    NoConvergence(String),

    #[error("unsupported schema version `{0}`")]
    SchemaVersion(String),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub fn kind(&self) -> ErrorKind {
        match self {
            Error::InsufficientObservations { .. }
            | Error::RankDeficient { .. }
            | Error::ZeroVariance(_)
            | Error::NoConvergence(_) => ErrorKind::Numerical,
            Error::Io(_) => ErrorKind::Io,
            Error::Csv(e) if e.is_io_error() => ErrorKind::Io,
            _ => ErrorKind::Validation,
        }
    }
}
