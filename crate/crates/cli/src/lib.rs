//! Command-line front end: argument parsing, sweeps, and CSV/JSON output.

pub mod args;
pub mod commands;
pub mod compare;
pub mod error;
pub mod output;

pub use args::Cli;
pub use commands::run;
pub use error::{CliError, CliResult};
