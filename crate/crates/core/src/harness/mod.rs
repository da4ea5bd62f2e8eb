//! Experiment harness: config files, the multi-seed runner, CSV/JSON
//! export, and the CLI entry point.

pub mod cli;
pub mod config;
pub mod export;
pub mod runner;

pub use cli::cli_main;
pub use config::{
    parse_config, AlgorithmKind, AlgorithmSpec, ConfigError, EnvironmentSpec, ExperimentConfig,
    RunSettings, UecbModeSpec,
};
pub use export::{export_results, render_meta_json, render_per_seed_csv, render_regret_csv};
pub use runner::{
    aggregate, build_agent, build_environment, config_hash, pointwise_stats, realization_rng,
    run_experiment, run_realization, AggregateResult, ExperimentOutput, SeedOutcome,
};

use thiserror::Error;

use crate::baselines::BaselineError;
use crate::model::ModelError;
use crate::uecb::UecbError;

/// Errors surfaced by the harness; config problems exit with status 1,
/// everything else with status 2.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum HarnessError {
    #[error(transparent)]
    Config(#[from] ConfigError),

    #[error("invalid experiment: {0}")]
    Invalid(String),

    #[error("at timestep {timestep}: {source}")]
    Runtime {
        timestep: u64,
        source: ModelError,
    },

    #[error(transparent)]
    Model(#[from] ModelError),

    #[error(transparent)]
    Policy(#[from] UecbError),

    #[error(transparent)]
    Baseline(#[from] BaselineError),

    #[error("{path}: {message}")]
    Io { path: String, message: String },
}

impl HarnessError {
    /// Process exit status this error maps to.
    pub fn exit_code(&self) -> i32 {
        match self {
            HarnessError::Config(_) | HarnessError::Invalid(_) => 1,
            _ => 2,
        }
    }
}
