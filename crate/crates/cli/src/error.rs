use std::fmt;

use superrad_core::Error as CoreError;

#[derive(Debug)]
pub enum CliError {
    /// Unreadable, unparseable or inconsistent configuration.
    Config(String),
    /// A density-matrix invariant was breached during the run.
    Invariant(String),
    Io(String),
    Runtime(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) => 2,
            CliError::Invariant(_) => 3,
            CliError::Io(_) | CliError::Runtime(_) => 1,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Config(m) => write!(f, "config error: {m}"),
            CliError::Invariant(m) => write!(f, "{m}"),
            CliError::Io(m) => write!(f, "i/o error: {m}"),
            CliError::Runtime(m) => write!(f, "{m}"),
        }
    }
}

impl From<CoreError> for CliError {
    fn from(e: CoreError) -> Self {
        match e {
            CoreError::InvariantBreach { .. } | CoreError::NegativeEigenvalue(_) => {
                CliError::Invariant(e.to_string())
            }
            CoreError::FitDidNotConverge { .. } => CliError::Runtime(e.to_string()),
            // everything else traces back to the inputs
            _ => CliError::Config(e.to_string()),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e.to_string())
    }
}
