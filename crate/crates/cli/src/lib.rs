//! Experiment runner for the coarse-graining toolkit: parses JSON configs,
//! runs the numerical experiments and writes CSV files plus a manifest.

pub mod config;
pub mod experiments;
pub mod runner;
pub mod table;

pub use config::{ConfigError, ExperimentConfig, ExperimentKind, Params};
pub use runner::{execute, RunOptions, RunSummary};
