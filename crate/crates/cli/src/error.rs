use std::fmt;
use std::process::ExitCode;

use msw_core::Error;

/// Failure of a subcommand together with its process exit code.
#[derive(Debug)]
pub struct CliError {
    pub code: u8,
    pub message: String,
}

pub const EXIT_USAGE: u8 = 2;
pub const EXIT_INPUT: u8 = 3;
pub const EXIT_NUMERICAL: u8 = 4;

impl CliError {
    pub fn usage(message: impl Into<String>) -> Self {
        Self { code: EXIT_USAGE, message: message.into() }
    }

    pub fn input(message: impl Into<String>) -> Self {
        Self { code: EXIT_INPUT, message: message.into() }
    }

    /// Prefixes the message, keeping the exit code.
    pub fn context(mut self, what: impl fmt::Display) -> Self {
        self.message = format!("{what}: {}", self.message);
        self
    }

    pub fn exit_code(&self) -> ExitCode {
        ExitCode::from(self.code)
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

impl From<Error> for CliError {
    fn from(err: Error) -> Self {
        let code = match err {
            Error::InvalidOrder(_)
            | Error::InvalidParameter(_)
            | Error::InvalidConfig(_)
            | Error::InvalidDimension(..)
            | Error::Unsupported(_) => EXIT_USAGE,
            Error::DimensionMismatch { .. }
            | Error::InvalidMeasure(_)
            | Error::Parse(_)
            | Error::Io(_)
            | Error::Csv(_)
            | Error::Image(_) => EXIT_INPUT,
            Error::DegenerateInput(_) | Error::ResourceLimit(_) | Error::Numerical(_) | Error::Divergence { .. } => {
                EXIT_NUMERICAL
            }
        };
        Self { code, message: err.to_string() }
    }
}

impl From<std::io::Error> for CliError {
    fn from(err: std::io::Error) -> Self {
        Self::input(err.to_string())
    }
}

pub type CliResult<T> = Result<T, CliError>;
