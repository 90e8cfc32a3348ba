//! File formats, run configuration and diagram rendering behind the
//! `sublevel` command-line tool.

pub mod config;
pub mod files;
pub mod svg;

use std::path::PathBuf;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: {message}")]
    Format { path: PathBuf, message: String },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error(transparent)]
    Core(#[from] sublevel::Error),
}

pub type Result<T> = std::result::Result<T, CliError>;
