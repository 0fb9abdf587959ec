use std::path::PathBuf;

use crate::model::ValidationReport;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// An argument lies outside the mathematical domain of an operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// An operation was called in a way its contract does not allow
    /// (wrong representation, too few samples, no bipartition, ...).
    #[error("usage error: {0}")]
    Usage(String),

    #[error("invalid configuration:\n{0}")]
    Invalid(ValidationReport),

    /// Probability reached the outer edge of the momentum grid.
    #[error("wrap-around contamination at kick {kick}: edge weight {weight:.3e} on rotor {rotor}")]
    EdgeContamination { kick: usize, rotor: usize, weight: f64 },

    #[error("effective single-rotor reduction unsupported: {0}")]
    UnsupportedReduction(String),

    #[error("run failed at detuning {detuning}: {source}")]
    AtDetuning {
        detuning: f64,
        #[source]
        source: Box<Error>,
    },

    #[error("config error: {0}")]
    Config(String),

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
