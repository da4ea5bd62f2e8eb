//! Epoch-based index policy driven by convergence bounds.
//!
//! The policy plays a chosen arm for a whole epoch whose length grows
//! geometrically in the number of epochs that arm has already received:
//! `2·rho2·exp(rho1·(m+1))`, rounded up to an even integer. Each arm keeps
//! an optimistic index
//!
//! - noiseless: the epoch's last reward plus the convergence bonus
//!   `L·exp(-len/tau_c)`;
//! - noisy: the mean of the epoch's second half, plus an
//!   equilibrium-noise bonus and a concentration radius that shrinks as
//!   `delta_n = 1/t_n³` tightens.
//!
//! The next epoch goes to the arm with the largest index, after one
//! initialization epoch per arm.

use rand::RngCore;
use thiserror::Error;

use crate::agent::Agent;
use crate::model::{ActionId, ConvergenceKnowledge};
use crate::num::{ceil_with_snap, Real};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum UecbError {
    #[error("epoch length overflows the schedule at m = {m_prior}")]
    ScheduleOverflow { m_prior: u32 },

    #[error("epoch rewards have length {got}, scheduled epoch length is {expected}")]
    LengthMismatch { expected: u64, got: usize },

    #[error("invalid input: {0}")]
    InvalidInput(String),
}

/// Which index rule the policy runs.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum UecbMode {
    Noiseless,
    Noisy,
}

/// Policy parameters: epoch-growth constants and the agent-side bounds.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UecbParams<R> {
    pub rho1: R,
    pub rho2: R,
    pub mode: UecbMode,
    pub knowledge: ConvergenceKnowledge<R>,
}

impl<R: Real> UecbParams<R> {
    pub fn new(
        rho1: R,
        rho2: R,
        mode: UecbMode,
        knowledge: ConvergenceKnowledge<R>,
    ) -> Result<Self, UecbError> {
        if !(rho1 > R::zero()) || !(rho2 > R::zero()) {
            return Err(UecbError::InvalidInput(format!(
                "rho1 and rho2 must be > 0, got {rho1}, {rho2}"
            )));
        }
        Ok(Self {
            rho1,
            rho2,
            mode,
            knowledge,
        })
    }

    /// Doubling schedule (`rho1 = ln 2`, `rho2 = 1`).
    pub fn doubling(mode: UecbMode, knowledge: ConvergenceKnowledge<R>) -> Self {
        Self {
            rho1: R::of(std::f64::consts::LN_2),
            rho2: R::one(),
            mode,
            knowledge,
        }
    }
}

/// Length of the epoch an arm with `m_prior` completed epochs would get:
/// `2·rho2·exp(rho1·(m_prior+1))` rounded up to the nearest even integer,
/// at least 2. Evenness keeps the noisy half-epoch split exact.
pub fn epoch_length<R: Real>(m_prior: u32, params: &UecbParams<R>) -> Result<u64, UecbError> {
    let exponent = params.rho1.as_f64() * f64::from(m_prior + 1);
    let raw = 2.0 * params.rho2.as_f64() * exponent.exp();
    if !raw.is_finite() || raw >= 2u64.pow(62) as f64 {
        return Err(UecbError::ScheduleOverflow { m_prior });
    }
    let snapped = ceil_with_snap(raw) as u64;
    let even = if snapped % 2 == 0 { snapped } else { snapped + 1 };
    Ok(even.max(2))
}

/// Noiseless index: last observed reward plus the convergence bonus
/// `L·exp(-epoch_len/tau_c)`.
pub fn noiseless_index<R: Real>(
    x_last: R,
    epoch_len: u64,
    knowledge: &ConvergenceKnowledge<R>,
) -> R {
    x_last + knowledge.lipschitz * (-R::of(epoch_len as f64) / knowledge.tau_c).exp()
}

/// Equilibrium-noise bonus of the noisy index:
/// `(2/ℓ)·L·exp(-(1+ℓ/2)/tau_c) / (1 − exp(-1/tau_c))`.
pub fn equilibrium_noise_term<R: Real>(epoch_len: u64, knowledge: &ConvergenceKnowledge<R>) -> R {
    let len = R::of(epoch_len as f64);
    let tau = knowledge.tau_c;
    let numer = (-(R::one() + len / R::of(2.0)) / tau).exp();
    // 1 - exp(-1/tau) via expm1 for large tau.
    let denom = -(-tau.recip()).exp_m1();
    R::of(2.0) / len * knowledge.lipschitz * numer / denom
}

/// Concentration radius `sqrt((4σ²/ℓ)·ln(2/δ_n))`.
pub fn confidence_radius<R: Real>(epoch_len: u64, sigma: R, delta_n: R) -> Result<R, UecbError> {
    if !(delta_n > R::zero() && delta_n < R::of(2.0)) {
        return Err(UecbError::InvalidInput(format!(
            "delta_n must lie in (0,2), got {delta_n}"
        )));
    }
    let len = R::of(epoch_len as f64);
    Ok((R::of(4.0) * sigma * sigma / len * (R::of(2.0) / delta_n).ln()).sqrt())
}

/// Epoch-length thresholds from the concentration analysis, diagnostic
/// only (the policy never sees the gap): the noise threshold
/// `(64σ²/Δ²)·ln(2/δ_n)` and the convergence threshold `2·tau_c·ln(8L/Δ)`.
pub fn separation_thresholds<R: Real>(
    delta_a: R,
    delta_n: R,
    knowledge: &ConvergenceKnowledge<R>,
) -> Result<(R, R), UecbError> {
    if !(delta_a > R::zero()) {
        return Err(UecbError::InvalidInput(format!(
            "gap must be > 0, got {delta_a}"
        )));
    }
    if !(delta_n > R::zero() && delta_n < R::of(2.0)) {
        return Err(UecbError::InvalidInput(format!(
            "delta_n must lie in (0,2), got {delta_n}"
        )));
    }
    let sigma = knowledge.sigma;
    let ell1 =
        R::of(64.0) * sigma * sigma / (delta_a * delta_a) * (R::of(2.0) / delta_n).ln();
    let ell2 = R::of(2.0)
        * knowledge.tau_c
        * (R::of(8.0) * knowledge.lipschitz / delta_a).ln();
    Ok((ell1, ell2))
}

/// Per-arm bookkeeping.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ArmStats<R> {
    /// Completed epochs `m_a`.
    pub epochs: u32,
    /// Length of the arm's most recent epoch.
    pub last_epoch_len: u64,
    /// Reward estimate from that epoch.
    pub x_hat: R,
    /// Optimistic index; unexplored arms sit at +infinity.
    pub index: R,
    has_estimate: bool,
}

/// Global policy state: per-arm statistics plus the epoch and time
/// counters.
#[derive(Debug, Clone, PartialEq)]
pub struct EpochState<R> {
    arms: Vec<ArmStats<R>>,
    /// Timesteps elapsed at the last epoch end.
    t: u64,
    /// Completed epochs.
    n: u64,
}

impl<R: Real> EpochState<R> {
    pub fn new(action_count: usize) -> Self {
        assert!(action_count > 0, "need at least one arm");
        Self {
            arms: vec![
                ArmStats {
                    epochs: 0,
                    last_epoch_len: 0,
                    x_hat: R::zero(),
                    index: R::infinity(),
                    has_estimate: false,
                };
                action_count
            ],
            t: 0,
            n: 0,
        }
    }

    pub fn action_count(&self) -> usize {
        self.arms.len()
    }

    pub fn arm(&self, action: ActionId) -> &ArmStats<R> {
        &self.arms[action.zero_based()]
    }

    /// Timesteps at the last epoch end.
    pub fn elapsed(&self) -> u64 {
        self.t
    }

    /// Completed epochs.
    pub fn epoch_count(&self) -> u64 {
        self.n
    }

    /// Folds a completed full epoch into the state. The reward slice must
    /// match the scheduled epoch length of the played arm.
    pub fn update_after_epoch(
        &mut self,
        played: ActionId,
        rewards: &[R],
        params: &UecbParams<R>,
    ) -> Result<(), UecbError> {
        let expected = epoch_length(self.arms[played.zero_based()].epochs, params)?;
        if rewards.len() as u64 != expected {
            return Err(UecbError::LengthMismatch {
                expected,
                got: rewards.len(),
            });
        }
        self.apply(played, rewards, params);
        Ok(())
    }

    /// Folds a horizon-truncated final epoch: the estimate uses the second
    /// half of whatever was played if at least two samples remain (noisy
    /// mode) or the last sample (noiseless); otherwise the estimate is left
    /// stale and only the counters advance.
    pub fn update_after_truncated_epoch(
        &mut self,
        played: ActionId,
        rewards: &[R],
        params: &UecbParams<R>,
    ) {
        self.apply(played, rewards, params);
    }

    fn apply(&mut self, played: ActionId, rewards: &[R], params: &UecbParams<R>) {
        let k = params.knowledge;
        let idx = played.zero_based();
        let len = rewards.len() as u64;
        let enough = match params.mode {
            UecbMode::Noiseless => !rewards.is_empty(),
            UecbMode::Noisy => rewards.len() >= 2,
        };
        if enough {
            let arm = &mut self.arms[idx];
            arm.x_hat = match params.mode {
                UecbMode::Noiseless => *rewards.last().expect("nonempty"),
                UecbMode::Noisy => {
                    let half = &rewards[rewards.len() / 2..];
                    half.iter().copied().sum::<R>() / R::of(half.len() as f64)
                }
            };
            arm.last_epoch_len = len;
            arm.has_estimate = true;
        }
        self.arms[idx].epochs += 1;
        self.t += len;
        self.n += 1;

        match params.mode {
            UecbMode::Noiseless => {
                // Only the played arm's index moves.
                let arm = &mut self.arms[idx];
                if arm.has_estimate {
                    arm.index = noiseless_index(arm.x_hat, arm.last_epoch_len, &k);
                }
            }
            UecbMode::Noisy => {
                // Every arm's radius is refreshed with the new delta_n,
                // keeping its stale estimate and epoch length.
                let t = R::of(self.t as f64);
                let delta_n = (t * t * t).recip();
                for arm in &mut self.arms {
                    if !arm.has_estimate {
                        continue;
                    }
                    let bonus = equilibrium_noise_term(arm.last_epoch_len, &k);
                    let radius = confidence_radius(arm.last_epoch_len, k.sigma, delta_n)
                        .expect("delta_n = 1/t³ lies in (0,2) once t ≥ 1");
                    arm.index = arm.x_hat + bonus + radius;
                }
            }
        }
    }
}

/// Next arm: round-robin while any arm lacks its initialization epoch,
/// then the largest index with ties broken toward the lowest arm.
pub fn select_action<R: Real>(state: &EpochState<R>) -> ActionId {
    let k = state.arms.len() as u64;
    if state.n < k {
        return ActionId::new(state.n as usize + 1).expect("nonzero");
    }
    let mut best = 0usize;
    for (i, arm) in state.arms.iter().enumerate().skip(1) {
        if arm.index > state.arms[best].index {
            best = i;
        }
    }
    ActionId::from_zero_based(best)
}

/// Ready-to-run agent: wires epoch scheduling, selection, and updates
/// behind the block interface the experiment loop drives.
#[derive(Debug, Clone)]
pub struct UecbAgent<R> {
    params: UecbParams<R>,
    state: EpochState<R>,
    pending_scheduled: Option<u64>,
}

impl<R: Real> UecbAgent<R> {
    pub fn new(action_count: usize, params: UecbParams<R>) -> Self {
        Self {
            params,
            state: EpochState::new(action_count),
            pending_scheduled: None,
        }
    }

    pub fn state(&self) -> &EpochState<R> {
        &self.state
    }

    pub fn params(&self) -> &UecbParams<R> {
        &self.params
    }
}

impl<R: Real> Agent<R> for UecbAgent<R> {
    fn next_block(&mut self, remaining: u64, _rng: &mut dyn RngCore) -> (ActionId, u64) {
        let action = select_action(&self.state);
        let scheduled = epoch_length(self.state.arm(action).epochs, &self.params)
            // An overflowing schedule is longer than any horizon.
            .unwrap_or(u64::MAX);
        self.pending_scheduled = Some(scheduled);
        (action, scheduled.min(remaining).max(1))
    }

    fn observe_block(&mut self, action: ActionId, rewards: &[R]) {
        let scheduled = self
            .pending_scheduled
            .take()
            .expect("observe_block follows next_block");
        if rewards.len() as u64 == scheduled {
            self.state
                .update_after_epoch(action, rewards, &self.params)
                .expect("scheduled epoch length");
        } else {
            self.state
                .update_after_truncated_epoch(action, rewards, &self.params);
        }
    }
}
