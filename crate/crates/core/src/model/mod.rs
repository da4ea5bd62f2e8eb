//! Core abstractions: actions, states, environments, equilibria, regret.
//!
//! An environment is a pair of maps `(g, f)`: `g` steps the state under an
//! action, `f` scores the pair with an expected reward in `[0, 1]`. Observed
//! rewards add Gaussian noise with a declared subgaussian parameter. Every
//! policy and concrete environment in this crate plugs into the
//! [`Environment`] trait defined here.

mod action;
mod environment;
mod equilibrium;
mod regret;
mod state;

pub use action::ActionId;
pub use environment::{
    check_contraction, step_environment, ContractionReport, ConvergenceKnowledge, Environment,
    StepOutcome,
};
pub use equilibrium::{
    compute_equilibria, compute_equilibrium, compute_gaps, default_max_iters, EquilibriumInfo,
    EquilibriumSet,
};
pub use regret::RegretTrajectory;
pub use state::{Norm, StateVector};

use thiserror::Error;

/// Errors raised by the core model layer and by environment dynamics.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum ModelError {
    #[error("action index {index} outside 1..={count}")]
    InvalidAction { index: usize, count: usize },

    #[error("state dimension {got} does not match environment dimension {expected}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error(
        "fixed-point iteration did not converge after {iterations} iterations \
         (last residual {residual})"
    )]
    ConvergenceFailure { iterations: usize, residual: f64 },

    #[error("dynamics unstable: per-step factor {factor} at coordinate {coordinate}")]
    DynamicsInstability { factor: f64, coordinate: usize },

    #[error("state {0} outside the tabulated domain")]
    DomainError(String),
}
