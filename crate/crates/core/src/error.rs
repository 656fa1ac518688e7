use std::path::PathBuf;

use thiserror::Error;

use crate::dynamics::VesselState;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("simulation diverged: non-finite state {0:?}")]
    Diverged(VesselState),

    #[error("episode already terminated ({0}); call reset before stepping again")]
    EpisodeDone(String),

    #[error("AIS track for vessel `{id}` has out-of-order timestamps ({prev} then {next})")]
    UnorderedTimestamps { id: String, prev: f64, next: f64 },

    #[error("malformed input at {location}: {message}")]
    Parse { location: String, message: String },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    pub(crate) fn config(msg: impl Into<String>) -> Self {
        Error::Config(msg.into())
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}

pub(crate) fn read_to_string(path: &std::path::Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| Error::io(path, e))
}
