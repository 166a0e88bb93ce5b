//! Library side of the `memlab` command-line tool: config parsing, sweeps,
//! verification suites and the batch/transcript utilities.

pub mod commands;
pub mod config;
pub mod error;
pub mod suites;
pub mod sweep;

pub use error::{CliError, Result};
