//! Command-line surface of the optimizer laboratory: configuration files,
//! trace CSVs, SVG charts and the five commands.

pub mod commands;
pub mod config;
pub mod error;
pub mod svg;
pub mod trace_csv;

pub use error::{CliError, CliResult, ExitStatus};
