//! Batch runner for the `qmemory` library: configuration, commands and
//! artifact output behind the `qmemory` binary.

pub mod commands;
pub mod config;
pub mod error;
pub mod output;

pub use commands::{execute, run_autocorr, run_check, run_gibbs, run_scan, CheckReport, Outcome};
pub use config::{Method, Purpose, RunConfig};
pub use error::CliError;
