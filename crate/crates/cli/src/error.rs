//! CLI-level errors and their process exit codes.

use thiserror::Error;

/// Exit code for configuration problems: unparsable or contradictory
/// configs, missing files, out-of-range parameters.
pub const EXIT_CONFIG: i32 = 2;
/// Exit code for numerical failures during a run (unstable time step,
/// non-finite values, failed sampling).
pub const EXIT_NUMERICAL: i32 = 3;

#[derive(Error, Debug)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),

    #[error("numerical failure: {0}")]
    Numerical(String),
}

impl CliError {
    pub fn config(msg: impl Into<String>) -> Self {
        CliError::Config(msg.into())
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => EXIT_CONFIG,
            CliError::Numerical(_) => EXIT_NUMERICAL,
        }
    }
}

impl From<pgl_core::Error> for CliError {
    fn from(e: pgl_core::Error) -> Self {
        use pgl_core::Error as E;
        match e {
            E::Numerical(_) | E::DtTooLarge { .. } => CliError::Numerical(e.to_string()),
            // everything else is detected before numeric work starts and
            // traces back to the inputs
            _ => CliError::Config(e.to_string()),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Config(format!("io: {e}"))
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        CliError::Config(format!("json: {e}"))
    }
}

pub type Result<T> = std::result::Result<T, CliError>;
