//! Experiment orchestration: the config schema and the pipeline stages
//! behind the `calibrec` binary (simulate, train, evaluate, abtest).

pub mod commands;
pub mod config;
pub mod error;

pub use commands::{cmd_abtest, cmd_evaluate, cmd_simulate, cmd_train};
pub use config::ExperimentConfig;
pub use error::CliError;
