//! CLI failure type and the process exit-code taxonomy.
//!
//! Exit codes are part of the tool's contract: 0 success (or release
//! granted), 1 negative evaluation or failed release gate, 2 usage and
//! validation problems, 3 data problems, 4 internal faults. A failed
//! gate is an ordinary outcome, not an error, so this type only covers
//! the 2/3/4 classes; commands return exit 1 as a value.

use std::fmt;
use std::io;

use flowmimic::Error;

pub const EXIT_GATE_FAILED: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_DATA: i32 = 3;
pub const EXIT_INTERNAL: i32 = 4;

#[derive(Debug)]
pub enum CliError {
    /// Library failure, optionally tagged with what the CLI was doing.
    Core {
        what: Option<String>,
        source: Error,
    },
    /// Bad invocation: flag values, config keys, wrong kind of file.
    Usage(String),
    /// A fault in the tool itself, such as an unserializable manifest.
    Internal(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Core { source, .. } => core_exit_code(source),
            CliError::Usage(_) => EXIT_USAGE,
            CliError::Internal(_) => EXIT_INTERNAL,
        }
    }
}

/// Configuration mistakes and missing files are the caller's to fix
/// (usage class); everything else the library reports is wrong data.
/// Wrapper variants classify by their root cause.
fn core_exit_code(err: &Error) -> i32 {
    match err {
        Error::Config(_) => EXIT_USAGE,
        Error::Storage(e) if e.kind() == io::ErrorKind::NotFound => EXIT_USAGE,
        Error::Selection { source, .. } | Error::Stage { source, .. } => core_exit_code(source),
        _ => EXIT_DATA,
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Core { what: Some(what), source } => write!(f, "{what}: {source}"),
            CliError::Core { what: None, source } => write!(f, "{source}"),
            CliError::Usage(msg) => write!(f, "{msg}"),
            CliError::Internal(msg) => write!(f, "internal error: {msg}"),
        }
    }
}

impl From<Error> for CliError {
    fn from(source: Error) -> Self {
        CliError::Core { what: None, source }
    }
}

impl From<io::Error> for CliError {
    fn from(source: io::Error) -> Self {
        CliError::Core { what: None, source: source.into() }
    }
}

/// Tags a library result with the activity it belongs to, so a failure
/// deep in a run names the flag or file that produced it.
pub trait Context<T> {
    fn ctx(self, what: impl Into<String>) -> Result<T, CliError>;
}

impl<T> Context<T> for Result<T, Error> {
    fn ctx(self, what: impl Into<String>) -> Result<T, CliError> {
        self.map_err(|source| CliError::Core { what: Some(what.into()), source })
    }
}

impl<T> Context<T> for Result<T, io::Error> {
    fn ctx(self, what: impl Into<String>) -> Result<T, CliError> {
        self.map_err(|e| CliError::Core { what: Some(what.into()), source: e.into() })
    }
}
