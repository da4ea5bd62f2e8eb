//! Baseline policies operating on the same noisy-reward interface as the
//! epoch policy: try-then-commit, UCB, and (restarting) EXP3. None of them
//! see the state.

mod exp3;
mod naive;
mod ucb;

pub use exp3::{exp3_probabilities, exp3_update, Exp3Params, Exp3Policy};
pub use naive::{naive_select, NaiveParams, NaivePolicy};
pub use ucb::{ucb_select, UcbPolicy};

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum BaselineError {
    #[error("invalid input: {0}")]
    InvalidInput(String),
}
