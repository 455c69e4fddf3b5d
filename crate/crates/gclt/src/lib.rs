//! Experiment runner for the block-method limit theorems: TOML configs,
//! multi-threaded Monte Carlo, and JSON/CSV artifacts.

pub mod commands;
pub mod config;
pub mod error;
pub mod exec;
pub mod inequality_suite;
pub mod output;

pub use config::{ExperimentConfig, Overrides};
pub use error::CliError;
pub use exec::Threaded;
