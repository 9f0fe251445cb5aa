//! Exit-code discipline: 0 success, 1 usage, 2 data, 3 numerical failure.
//! Every failure prints one `ERROR[code]: message` line to standard error.

use std::fmt;

pub const EXIT_USAGE: i32 = 1;
pub const EXIT_DATA: i32 = 2;
pub const EXIT_NUMERIC: i32 = 3;

#[derive(Debug)]
pub enum CliError {
    /// Bad flags, bad config values, parameters a computation rejects.
    Usage(String),
    /// Input files that are missing, malformed, or insufficient.
    Data(String),
    /// Solver or Monte Carlo failure on otherwise valid input.
    Numeric(String),
}

impl CliError {
    pub fn usage(msg: impl Into<String>) -> Self {
        CliError::Usage(msg.into())
    }

    pub fn data(msg: impl Into<String>) -> Self {
        CliError::Data(msg.into())
    }

    pub fn code(&self) -> i32 {
        match self {
            CliError::Usage(_) => EXIT_USAGE,
            CliError::Data(_) => EXIT_DATA,
            CliError::Numeric(_) => EXIT_NUMERIC,
        }
    }

    pub fn message(&self) -> &str {
        match self {
            CliError::Usage(m) | CliError::Data(m) | CliError::Numeric(m) => m,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "ERROR[{}]: {}", self.code(), self.message())
    }
}

impl std::error::Error for CliError {}

impl From<arrisk::Error> for CliError {
    fn from(e: arrisk::Error) -> Self {
        use arrisk::Error::*;
        match &e {
            InvalidParameter(_) | DimensionMismatch(_) | NotStationary { .. } => {
                CliError::Usage(e.to_string())
            }
            SeriesTooShort { .. } | NonFinite(_) | TailTooThin { .. } => {
                CliError::Data(e.to_string())
            }
            RankDeficient(_) | NonConvergence { .. } | TooManyFailures { .. } => {
                CliError::Numeric(e.to_string())
            }
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Data(e.to_string())
    }
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        CliError::Data(e.to_string())
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;
