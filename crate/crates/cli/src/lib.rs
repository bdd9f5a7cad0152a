//! Command-line front end: catalog queries, timescale verdicts, the
//! diffusion table and Wigner-function runs.

pub mod args;
pub mod commands;
pub mod manifest;

use std::path::PathBuf;

use decoherence_core::Error;

pub use args::Cli;
pub use commands::run;

/// Failures mapped onto the process exit code.
#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("numerical failure: {message}{}", .snapshot.as_ref().map(|p| format!(" (last good snapshot: {})", p.display())).unwrap_or_default())]
    Numerical { message: String, snapshot: Option<PathBuf> },
    #[error(transparent)]
    Core(#[from] Error),
}

impl CliError {
    /// 2 usage or configuration, 3 domain, 4 numerical failure.
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Numerical { .. } => 4,
            CliError::Core(e) => match e {
                Error::Domain(_) => 3,
                Error::Numerical { .. } => 4,
                Error::Parse { .. } | Error::Validation { .. } | Error::UnknownBody(_) | Error::Io(_) => 2,
            },
        }
    }
}
