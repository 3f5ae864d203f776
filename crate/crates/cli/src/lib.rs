//! Experiment drivers around `pgl-core`: config parsing, provenance-stamped
//! outputs, and the subcommand implementations behind the `pgl` binary.

pub mod commands;
pub mod config;
pub mod error;
pub mod outputs;
pub mod provenance;

pub use commands::RunContext;
pub use error::{CliError, Result, EXIT_CONFIG, EXIT_NUMERICAL};
pub use provenance::Provenance;
