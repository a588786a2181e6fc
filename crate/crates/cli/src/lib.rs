//! Configuration-driven experiment runner for the fmala samplers, writing deterministic CSV.

pub mod config;
pub mod experiments;
pub mod report;

pub use config::{parse_config, parse_str, ConfigError, Experiment, ExperimentConfig};
pub use experiments::{run_experiment, RunError};
pub use report::{write_csv, CsvReport};
