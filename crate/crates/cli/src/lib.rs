//! Command-line front end: configuration, subcommands and error reporting.

pub mod commands;
pub mod config;
pub mod error;

pub use commands::run;
pub use config::ExperimentConfig;
pub use error::{CliError, CliResult};
