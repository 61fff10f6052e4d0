//! End-to-end runs over GraphML corpora: layout, projection, clustering,
//! metrics and rendered artifacts, plus the HTTP service behind the explorer.

use std::path::PathBuf;

use sha2::{Digest, Sha256};
use thiserror::Error;

pub mod config;
pub mod grid;
pub mod manifest;
pub mod run;
pub mod serve;

pub use config::RunConfig;
pub use grid::{evaluate_grid, CellOutcome, GridResult};
pub use manifest::Manifest;
pub use run::{run_pipeline, RunSummary};

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error("invalid config: {0}")]
    Config(String),
    #[error("{0}: {1}")]
    Io(PathBuf, String),
    #[error("no valid inputs")]
    NoValidInputs,
    #[error("cannot bind {0}: {1}")]
    Bind(String, String),
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}
