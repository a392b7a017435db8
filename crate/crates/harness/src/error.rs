//! Harness error type.

use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = HarnessError> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error(transparent)]
    Core(#[from] magloc_core::Error),

    #[error("invalid config: {0}")]
    Config(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },

    #[error("cannot parse config: {0}")]
    Toml(#[from] toml::de::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error("unknown preset {name:?}; available: {available}")]
    UnknownPreset { name: String, available: String },

    #[error("duplicate pose label {0:?}")]
    DuplicateLabel(String),

    #[error("sensor-count experiment needs a non-empty list of sizes")]
    EmptySizes,

    #[error("geometry offsets must be positive, got {0}")]
    NonPositiveOffset(f64),
}

impl HarnessError {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Self::Io {
            path: path.into(),
            source,
        }
    }
}
