//! Exit-code contract: 0 success, 1 validation findings, 2 input errors,
//! 3 alignment errors.

use std::fmt;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Ok = 0,
    Findings = 1,
    Input = 2,
    Alignment = 3,
}

impl Status {
    pub fn code(self) -> u8 {
        self as u8
    }
}

#[derive(Debug)]
pub struct CliError {
    pub status: Status,
    pub error: anyhow::Error,
}

impl CliError {
    pub fn input(error: impl Into<anyhow::Error>) -> Self {
        CliError {
            status: Status::Input,
            error: error.into(),
        }
    }

    pub fn alignment(error: impl Into<anyhow::Error>) -> Self {
        CliError {
            status: Status::Alignment,
            error: error.into(),
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:#}", self.error)
    }
}

impl std::error::Error for CliError {}

/// Maps any error to an input error, with context.
pub trait InputContext<T> {
    fn input(self, context: impl fmt::Display) -> Result<T, CliError>;
}

impl<T, E: Into<anyhow::Error>> InputContext<T> for Result<T, E> {
    fn input(self, context: impl fmt::Display) -> Result<T, CliError> {
        self.map_err(|e| CliError::input(e.into().context(context.to_string())))
    }
}

pub type CliResult<T> = Result<T, CliError>;
