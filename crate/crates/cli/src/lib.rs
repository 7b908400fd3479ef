//! Experiment runner for `mms-core`: JSON configs in, JSON summaries and CSV tables out.

pub mod config;
pub mod report;
pub mod run;
pub mod schema;

pub use config::{load_config, parse_config, ExperimentConfig, LoadedConfig, SUBCOMMANDS};
pub use report::{ExperimentReport, Table};
pub use run::{exit_code, run};
