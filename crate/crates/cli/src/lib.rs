//! Configuration, experiment runners and file output behind the `qmarket`
//! command.

pub mod config;
pub mod error;
pub mod output;
pub mod run;

pub use config::ExperimentConfig;
pub use error::{CliError, CliResult, Kind};
