//! Experiment runner for multilevel compressed sensing.
//!
//! Configs are TOML files ([`config::ExperimentConfig`]); [`run::run`]
//! executes one, writes its artifacts and a manifest with SHA-256 hashes.
//! The numerics live in `mlcs-core`.

pub mod config;
pub mod error;
pub mod experiments;
pub mod formats;
pub mod run;

pub use config::{ExperimentConfig, ExperimentKind};
pub use error::{CliError, Result};
pub use run::{exit_code, run};
