//! Command-line harness: trace ingestion, experiment commands and reports.

pub mod args;
pub mod commands;
pub mod report;

pub use args::{Cli, Command};
pub use commands::{execute, CliError, Outcome};
pub use report::{ExperimentReport, OutputFormat};
