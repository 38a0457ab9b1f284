//! Batch runs of the `lcentral` toolkit with JSON and CSV artifacts.

mod commands;
pub mod config;
pub mod output;

pub use commands::{run, Artifact};
pub use config::{Command, Format, Output, RunConfig};

/// Interface schema version, bumped when a JSON field changes.
pub const SCHEMA_VERSION: u32 = 1;

pub const LONG_VERSION: &str = concat!(env!("CARGO_PKG_VERSION"), " (output schema 1)");

/// Process exit codes.
pub mod exit {
    pub const SUCCESS: u8 = 0;
    pub const USAGE: u8 = 1;
    pub const TOLERANCE: u8 = 2;
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("invalid value for {flag}: {msg}")]
    Usage { flag: &'static str, msg: String },
    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

impl CliError {
    pub fn usage(flag: &'static str, msg: impl Into<String>) -> Self {
        CliError::Usage { flag, msg: msg.into() }
    }

    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage { .. } => exit::USAGE,
            // Unwritable output is still a problem with the invocation.
            CliError::Io { .. } => exit::USAGE,
        }
    }
}
