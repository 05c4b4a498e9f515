//! Command implementations behind the `rdeq` binary, exposed as a library
//! so integration tests can drive the same code paths directly.

pub mod cli;
pub mod output;
pub mod run;
pub mod verify;

/// Exit codes: 0 success, 1 suite failure, 2 infeasible input, 3 resource
/// cap, 64 usage.
pub mod exit_code {
    pub const OK: i32 = 0;
    pub const SUITE_FAILURE: i32 = 1;
    pub const INFEASIBLE: i32 = 2;
    pub const RESOURCE_CAP: i32 = 3;
    pub const USAGE: i32 = 64;
}

/// Errors at the command layer, mapped onto the exit-code contract.
#[derive(Debug)]
pub enum CliError {
    /// Malformed flags or suite names: exit 64.
    Usage(String),
    /// Anything the engine rejects: exit 2, except resource caps (exit 3).
    Core(rdeq_core::Error),
    /// Filesystem trouble: exit 2.
    Io(std::io::Error),
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Usage(m) => write!(f, "usage: {m}"),
            CliError::Core(e) => write!(f, "{e}"),
            CliError::Io(e) => write!(f, "{e}"),
        }
    }
}

impl From<rdeq_core::Error> for CliError {
    fn from(e: rdeq_core::Error) -> Self {
        CliError::Core(e)
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e)
    }
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => exit_code::USAGE,
            CliError::Core(rdeq_core::Error::EnumerationCap { .. }) => exit_code::RESOURCE_CAP,
            CliError::Core(_) => exit_code::INFEASIBLE,
            CliError::Io(_) => exit_code::INFEASIBLE,
        }
    }
}
