//! Batch front end for the crcm toolkit: JSON experiment configs, seeded
//! runs and reproducible artifact directories.

pub mod config;
pub mod error;
pub mod run;
pub mod validate;

pub use config::{AnalysisSpec, ExperimentConfig, Model};
pub use error::CliError;
pub use run::{content_hash, run_experiment, Command, Manifest, ReportFile};
pub use validate::{validate_config, ValidationReport};
