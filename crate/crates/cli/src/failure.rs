//! Failure classification behind the process exit codes.
//!
//! Every command failure is sorted into one of three buckets: the caller
//! misused the interface (exit 1), the inputs are missing or unusable
//! (exit 2), or the program itself broke an invariant (exit 3). Success
//! is exit 0. Scripts can branch on the code without parsing messages.

use std::process::ExitCode;

pub const EXIT_USAGE: u8 = 1;
pub const EXIT_DATA: u8 = 2;
pub const EXIT_INTERNAL: u8 = 3;

/// A classified command failure.
#[derive(Debug)]
pub enum Failure {
    /// The command line itself is wrong (bad flag value, invalid combination).
    Usage(anyhow::Error),
    /// Input files are missing, malformed, or describe an impossible task.
    Data(anyhow::Error),
    /// The program violated one of its own invariants.
    Internal(anyhow::Error),
}

impl Failure {
    pub fn error(&self) -> &anyhow::Error {
        match self {
            Failure::Usage(e) | Failure::Data(e) | Failure::Internal(e) => e,
        }
    }

    pub fn code(&self) -> u8 {
        match self {
            Failure::Usage(_) => EXIT_USAGE,
            Failure::Data(_) => EXIT_DATA,
            Failure::Internal(_) => EXIT_INTERNAL,
        }
    }

    pub fn exit_code(&self) -> ExitCode {
        ExitCode::from(self.code())
    }
}

pub fn usage(error: anyhow::Error) -> Failure {
    Failure::Usage(error)
}

pub fn data(error: anyhow::Error) -> Failure {
    Failure::Data(error)
}

pub fn internal(error: anyhow::Error) -> Failure {
    Failure::Internal(error)
}
