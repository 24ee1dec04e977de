//! Library side of the `penreg` command line tool: configuration, CSV
//! ingestion, subcommand dispatch and report serialization.

pub mod args;
pub mod config;
pub mod data;
pub mod report;
pub mod run;

pub use config::{Command, Format, RunConfig};
pub use report::Report;
pub use run::run;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Validation(String),

    #[error("{0}")]
    Io(String),

    #[error(transparent)]
    Core(#[from] penreg::Error),

    #[error("{command}: {source}")]
    Context { command: &'static str, source: Box<CliError> },
}

impl CliError {
    /// 2 for bad input, 3 for numerical failure, 4 for I/O.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Validation(_) => 2,
            CliError::Io(_) => 4,
            CliError::Core(e) if e.is_numerical() => 3,
            CliError::Core(_) => 2,
            CliError::Context { source, .. } => source.exit_code(),
        }
    }

    pub fn context(self, command: Command) -> Self {
        match self {
            CliError::Context { .. } => self,
            e => CliError::Context { command: command.name(), source: Box::new(e) },
        }
    }
}
