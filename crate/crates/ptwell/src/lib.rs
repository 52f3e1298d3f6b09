//! Command-line driver for `ptwell-core`: configuration files, parallel
//! sweeps and scans, CSV/JSON output and the invariant checks.

pub use ptwell_core as core;

pub mod commands;
pub mod config;
pub mod output;
pub mod parallel;
pub mod verify;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("{0}: {1}")]
    Io(String, #[source] std::io::Error),
    #[error("write failed: {0}")]
    Write(#[from] std::io::Error),
    #[error("configuration: {0}")]
    Config(String),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Core(#[from] ptwell_core::Error),
}
