//! Configuration, orchestration and persistence for tubelab runs.

pub mod config;
pub mod error;
pub mod manifest;
pub mod plots;
pub mod run;

pub use config::{parse_config, parse_config_with, ConfigError, ExperimentConfig, ExperimentKind, Overrides, Violation};
pub use error::CliError;
pub use manifest::{RunManifest, MANIFEST_FILE};
pub use plots::emit_plots;
pub use run::{run_experiment, RunOptions, RunOutcome};
