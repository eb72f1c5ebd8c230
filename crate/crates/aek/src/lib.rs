//! File formats, reports and commands behind the `aek` binary.

pub mod commands;
pub mod export;
pub mod report;
pub mod spec;

pub use commands::{run, Command, Options};
pub use report::Report;
pub use spec::SurfaceSpec;

/// Failure classes, each with its own process exit code.
#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("usage: {0}")]
    Usage(String),
    #[error("geometry: {0}")]
    Geometry(String),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) | CliError::Io(_) => 1,
            CliError::Geometry(_) => 2,
        }
    }
}

/// Exit code for a report whose checks failed.
pub const EXIT_VERIFICATION: i32 = 3;
