//! Configuration files, table and graph formats, and the experiment
//! pipeline behind the `warpcone` command.

pub mod config;
pub mod io;
pub mod pipeline;

use warpcone_core::Error;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error("format error: {0}")]
    Format(String),
    #[error(transparent)]
    Core(#[from] Error),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_FAILURE: i32 = 3;
pub const EXIT_RESOURCE: i32 = 4;

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) | CliError::Format(_) | CliError::Core(Error::Input(_)) => EXIT_CONFIG,
            CliError::Core(Error::Resource { .. }) => EXIT_RESOURCE,
            _ => EXIT_FAILURE,
        }
    }
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        CliError::Format(e.to_string())
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        CliError::Format(e.to_string())
    }
}

/// Short name of a core error variant, as recorded in reports.
pub fn error_kind(e: &Error) -> &'static str {
    match e {
        Error::Input(_) => "input",
        Error::Resource { .. } => "resource",
        Error::EmptyRegion { .. } => "empty-region",
        Error::TooLarge { .. } => "too-large",
        Error::Disconnected => "disconnected",
        Error::NotConverged { .. } => "not-converged",
        Error::Singular { .. } => "singular",
    }
}
