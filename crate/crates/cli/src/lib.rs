//! Command-line front end for `collatz-octave-core`: reproduces the reference
//! tables, generates and diffs the codebook and return paths, runs range
//! audits and exports the base graph.
//!
//! Exit codes: 0 when every check passes, 1 when findings or diff rows were
//! emitted, 2 on usage or I/O errors.

pub mod commands;
pub mod fixtures;
pub mod report;
pub mod sink;
pub mod tables;

use std::path::PathBuf;

use collatz_octave_core::analysis::RangeError;
use collatz_octave_core::kernel::KernelError;
use collatz_octave_core::paths::PathError;
use thiserror::Error;

pub use commands::{run, Cli};

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Fixture(#[from] fixtures::FixtureError),
    #[error("{}: {source}", path.as_ref().map_or("<stdout>".into(), |p| p.display().to_string()))]
    Io {
        path: Option<PathBuf>,
        source: std::io::Error,
    },
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Kernel(#[from] KernelError),
    #[error(transparent)]
    Range(#[from] RangeError),
    #[error(transparent)]
    Path(#[from] PathError),
    #[error("thread pool: {0}")]
    Pool(#[from] rayon::ThreadPoolBuildError),
}

impl From<std::io::Error> for CliError {
    fn from(source: std::io::Error) -> Self {
        CliError::Io { path: None, source }
    }
}

/// Outcome of a command that ran to completion.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct CommandResult {
    /// 0 when every check passed, 1 when findings were emitted.
    pub exit_code: u8,
    pub artifacts: Vec<PathBuf>,
    /// One-line human summaries, printed to stderr.
    pub notes: Vec<String>,
}

impl CommandResult {
    fn finding(&mut self, present: bool) {
        if present {
            self.exit_code = 1;
        }
    }
}
