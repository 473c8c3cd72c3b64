//! Command-line harness around the `sgcp` library: configuration loading,
//! the subcommands and their exit codes.

pub mod commands;
pub mod config;
pub mod error;

pub use config::{HarnessConfig, Overrides};
pub use error::{CliError, CliResult};
