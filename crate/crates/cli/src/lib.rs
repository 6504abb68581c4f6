//! Experiment harness: TOML-configured sweeps over the core algorithms, CSV
//! and SVG artifacts, and the acceptance checks.

pub mod config;
pub mod run;
pub mod svg;
pub mod verify;

pub use config::{ExperimentConfig, Kind};
pub use run::{run_experiment, run_report, RunSummary};

#[derive(Debug, thiserror::Error)]
pub enum HarnessError {
    #[error("config: {0}")]
    Config(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Core(#[from] skewlab_core::Error),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
}
