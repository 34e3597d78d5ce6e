//! Batch front-end for the bergbal laboratory: TOML experiment configs in,
//! JSON reports and CSV tables out.

pub mod config;
pub mod error;
pub mod report;
pub mod run;

pub use config::{parse_config, parse_config_with_default, Command, ExperimentConfig, Parsed};
pub use error::CliError;
pub use report::{read_report, to_json, write_report, RunReport, Status};
pub use run::run_experiment;
