//! Scenario files, datasets and checks behind the `diamag` binary.

pub mod cache;
pub mod commands;
pub mod config;
pub mod dataset;
pub mod expr;
pub mod verify;

use std::path::PathBuf;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{path}: {source}")]
    Config { path: PathBuf, source: config::ConfigError },
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error(transparent)]
    Model(#[from] diamag::error::Error),
    #[error("{0}")]
    Usage(String),
}
