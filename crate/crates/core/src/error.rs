use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("malformed document {path}: {message}")]
    Parse { path: PathBuf, message: String },

    /// A configuration or node value breaks one of its invariants.
    #[error("invalid `{field}`: {reason}")]
    Validation { field: String, reason: String },

    /// Wires do not fit the tracks available in a layout region.
    #[error("routing infeasible in {region}: {demand_um:.3} um of tracks exceed {capacity_um:.3} um")]
    RoutingInfeasible {
        region: String,
        demand_um: f64,
        capacity_um: f64,
    },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("unknown metric `{0}`")]
    UnknownMetric(String),

    #[error("tier {0} has no designs")]
    EmptyTier(String),

    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn validation(field: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::Validation {
            field: field.into(),
            reason: reason.into(),
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
