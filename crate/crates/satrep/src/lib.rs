//! Configuration, file formats, parallel drivers and figure tables for the
//! satellite frame-repetition model in `satrep-core`.

pub mod commands;
pub mod config;
pub mod figures;
pub mod output;
pub mod parallel;

use thiserror::Error;

pub use config::{Config, ConfigError};

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("model error: {0}")]
    Model(#[from] satrep_core::Error),
    #[error("cannot write `{path}`: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("{0}")]
    Usage(String),
}

impl CliError {
    /// 2 for configuration and usage errors, 3 for numerical failures,
    /// 1 for I/O.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) | CliError::Usage(_) => 2,
            CliError::Model(e) if e.is_numerical() => 3,
            CliError::Model(_) => 2,
            CliError::Io { .. } => 1,
        }
    }
}
