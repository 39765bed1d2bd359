//! Command-line front end: configuration, reports and the `finsler` subcommands.

pub mod config;
pub mod report;
mod run;

pub use config::{load_config, write_config, Checks, ConfigError, MetricRef, RunConfig, Samples};
pub use report::{write_report, Report, Summary};
pub use run::{run_cli, EXIT_FAIL, EXIT_INVALID, EXIT_OK, THREADS_ENV};
