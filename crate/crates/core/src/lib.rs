//! Bandit learning for systems that converge to an action-dependent
//! equilibrium.
//!
//! An agent repeatedly picks one of `K` actions. Underneath, a deterministic
//! dynamical system moves one step per timestep; holding any action fixed
//! would drive the state to that action's unique equilibrium. The agent only
//! sees a noisy reward and wants to accumulate reward close to what the best
//! equilibrium would pay.
//!
//! The crate provides:
//!
//! - [`model`]: the environment abstraction (evolution map, reward map,
//!   noise), equilibrium solving, gap and regret accounting.
//! - [`uecb`]: the epoch-based index policy built around convergence bounds,
//!   in noiseless and noisy variants.
//! - [`baselines`]: try-then-commit, UCB and (restarting) EXP3 policies that
//!   consume the same noisy-reward interface.
//! - [`envs`]: concrete environments — a networked SIS epidemic, a strongly
//!   monotone resource-allocation game, linear contractions, and two
//!   hand-built instances that defeat standard bandit policies.
//! - [`harness`]: config-driven multi-seed experiment runner with CSV/JSON
//!   output and the `eqbandit` CLI entry point.
//!
//! All numeric code is generic over the scalar type via [`num::Real`]
//! (implemented for `f32` and `f64`); the harness and the type aliases at
//! the crate root fix `f64`.

pub mod agent;
pub mod baselines;
pub mod envs;
pub mod harness;
pub mod linalg;
pub mod model;
pub mod num;
pub mod uecb;

pub use model::{ActionId, ConvergenceKnowledge, Norm, StateVector};
pub use num::Real;

/// Scalar type used by the harness and the CLI.
pub type Scalar = f64;

/// State vector over the default scalar.
pub type State = StateVector<Scalar>;

/// Regret trajectory over the default scalar.
pub type Trajectory = model::RegretTrajectory<Scalar>;

/// Equilibrium table over the default scalar.
pub type Equilibria = model::EquilibriumSet<Scalar>;
