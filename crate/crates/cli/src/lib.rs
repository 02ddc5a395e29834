//! Command-line front end: CSV ingestion, report envelopes and subcommands.

pub mod commands;
pub mod error;
pub mod io;
pub mod report;

pub use commands::{run, Cli};
pub use error::CliError;
