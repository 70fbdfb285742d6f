//! Config parsing, subcommand dispatch and table output for the `twl`
//! command-line tool.

pub mod commands;
pub mod config;
pub mod error;
pub mod output;

pub use commands::{run, Command};
pub use config::RunConfig;
pub use error::CliError;
pub use output::{Format, Table};
