//! Front end for the SSC-DL simulator: config loading, experiment runs and
//! CSV/JSON/gnuplot emission.
//!
//! The `sscdl` binary is a thin wrapper over [`commands`]; everything it
//! does is reachable from here for testing.

pub mod commands;
pub mod config;
pub mod output;

pub use commands::{
    cmd_beampattern, cmd_gamma_sweep, cmd_run, list_specs, Formats, Report, RunConfig, SpecSource,
};
pub use config::FlatConfig;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error("io error: {0}")]
    Io(String),
    #[error("experiment failed: {0}")]
    Experiment(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) => 2,
            CliError::Io(_) => 3,
            CliError::Experiment(_) => 4,
        }
    }
}
