//! Experiment runner for IDT-QC coding: BER sweeps of the ISI and
//! compute-and-forward pipelines, rate curves and code generation.

pub mod config;
pub mod run;
pub mod sweep;

pub use config::{ExperimentConfig, ExperimentKind, Snr};
pub use run::{run, RunOptions, RunOutput};
pub use sweep::{ber_sweep, BerPoint, TrialOutcome};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    /// Invalid configuration; exit code 2.
    #[error("config error: {0}")]
    Config(String),
    /// Pipeline or I/O failure at run time; exit code 3.
    #[error("runtime error: {0}")]
    Runtime(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Runtime(_) => 3,
        }
    }
}
