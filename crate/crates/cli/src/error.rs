use std::fmt;

use hypergrid_core::Error;

/// A failure with the process exit code it maps to.
#[derive(Debug)]
pub struct CliError {
    pub code: i32,
    pub message: String,
}

pub const USAGE: i32 = 1;
pub const IO: i32 = 2;
pub const INFEASIBLE: i32 = 3;
pub const UNPAIRED: i32 = 4;
pub const VERIFICATION: i32 = 5;

impl CliError {
    pub fn new(code: i32, message: impl Into<String>) -> Self {
        Self { code, message: message.into() }
    }

    pub fn usage(message: impl Into<String>) -> Self {
        Self::new(USAGE, message)
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        let code = match &e {
            Error::Io(_)
            | Error::Json(_)
            | Error::Csv(_)
            | Error::Format(_)
            | Error::SizeMismatch { .. }
            | Error::DimensionMismatch { .. } => IO,
            Error::InfeasibleSplit(_) => INFEASIBLE,
            Error::Unpaired(_) => UNPAIRED,
            _ => USAGE,
        };
        Self::new(code, e.to_string())
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        Self::new(IO, e.to_string())
    }
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        Self::new(IO, e.to_string())
    }
}

pub type CliResult<T = ()> = Result<T, CliError>;
