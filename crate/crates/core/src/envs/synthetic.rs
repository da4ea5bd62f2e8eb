use rand::{Rng, RngCore};

use crate::model::{
    ActionId, ConvergenceKnowledge, Environment, ModelError, Norm, StateVector,
};
use crate::num::Real;

/// Two-arm tabulated instance on which per-step index policies fail.
///
/// States live on the chain `-1, -0.5, 0.5, 1.5`; arm 1 walks the chain
/// down toward its fixed point `-1`, arm 2 walks it up toward `1.5`, and
/// the reward is `z²` for both arms. Convergence to either fixed point
/// needs two consecutive pulls of the same arm, which a UCB-style policy
/// started at `0.5` never grants: its sampled rewards stay `0.25` forever
/// while the best equilibrium pays `2.25`.
///
/// Rewards exceed `[0, 1]` and states exceed the unit ball by
/// construction, so this environment is exempt from those checks and is
/// only meant for baseline-failure experiments.
#[derive(Debug, Clone)]
pub struct UcbBreaker<R> {
    states: [R; 4],
    knowledge: ConvergenceKnowledge<R>,
}

impl<R: Real> UcbBreaker<R> {
    pub fn new() -> Self {
        let states = [R::of(-1.0), R::of(-0.5), R::of(0.5), R::of(1.5)];
        // Worst one-step ratio over the table is 0.8 (arm 2 from -1).
        let tau_c = (-R::of(0.8).ln()).recip().max(R::one());
        // |d(z²)/dz| ≤ 3 on [-1, 1.5].
        let knowledge = ConvergenceKnowledge::new(tau_c, R::of(3.0), R::zero())
            .expect("static parameters are valid");
        Self { states, knowledge }
    }

    fn state_index(&self, z: R) -> Result<usize, ModelError> {
        let eps = R::of(1e-9);
        self.states
            .iter()
            .position(|s| (*s - z).abs() < eps)
            .ok_or_else(|| ModelError::DomainError(format!("{z}")))
    }
}

impl<R: Real> Default for UcbBreaker<R> {
    fn default() -> Self {
        Self::new()
    }
}

impl<R: Real> Environment<R> for UcbBreaker<R> {
    fn action_count(&self) -> usize {
        2
    }

    fn state_dim(&self) -> usize {
        1
    }

    fn initial_state(&self) -> StateVector<R> {
        StateVector::scalar(R::of(0.5))
    }

    fn norm(&self) -> Norm {
        Norm::L1
    }

    fn noise_sigma(&self) -> R {
        R::zero()
    }

    fn evolve(&self, action: ActionId, state: &StateVector<R>) -> Result<StateVector<R>, ModelError> {
        let idx = self.state_index(state.as_scalar())?;
        let next = match action.get() {
            1 => idx.saturating_sub(1),
            _ => (idx + 1).min(3),
        };
        Ok(StateVector::scalar(self.states[next]))
    }

    fn expected_reward(&self, _action: ActionId, state: &StateVector<R>) -> R {
        let z = state.as_scalar();
        z * z
    }

    fn sample_feasible_state(&self, rng: &mut dyn RngCore) -> StateVector<R> {
        StateVector::scalar(self.states[rng.gen_range(0..4)])
    }

    fn agent_knowledge(&self) -> ConvergenceKnowledge<R> {
        self.knowledge
    }
}

/// Two-arm instance whose reward streams are indistinguishable for the
/// first `tau_c · ln(1/delta)` pulls of either arm.
///
/// Arm 1 pays zero everywhere and attracts the state to `-2`; arm 2
/// attracts it to `+2` and only pays once the state enters `[2 − delta, 2]`,
/// topping out at `delta`. Any policy must grant arm 2 that many
/// consecutive pulls before the arms look different.
#[derive(Debug, Clone)]
pub struct LowerBoundPair<R> {
    delta: R,
    rate: R,
    knowledge: ConvergenceKnowledge<R>,
}

impl<R: Real> LowerBoundPair<R> {
    pub fn new(delta: R, tau_c: R) -> Result<Self, ModelError> {
        if !(delta > R::zero() && delta < R::one()) {
            return Err(ModelError::InvalidInput(format!(
                "delta must lie in (0,1), got {delta}"
            )));
        }
        // The jump branch contracts by at most 1/2 per step, so the declared
        // rate exp(-1/tau_c) must stay above that.
        if !(tau_c >= R::of(1.5)) {
            return Err(ModelError::InvalidInput(format!(
                "tau_c must be >= 1.5, got {tau_c}"
            )));
        }
        let rate = (-tau_c.recip()).exp();
        let knowledge = ConvergenceKnowledge::new(tau_c, R::one(), R::zero())?;
        Ok(Self {
            delta,
            rate,
            knowledge,
        })
    }

    pub fn delta(&self) -> R {
        self.delta
    }
}

impl<R: Real> Environment<R> for LowerBoundPair<R> {
    fn action_count(&self) -> usize {
        2
    }

    fn state_dim(&self) -> usize {
        1
    }

    fn initial_state(&self) -> StateVector<R> {
        StateVector::scalar(R::one())
    }

    fn norm(&self) -> Norm {
        Norm::L1
    }

    fn noise_sigma(&self) -> R {
        R::zero()
    }

    fn evolve(&self, action: ActionId, state: &StateVector<R>) -> Result<StateVector<R>, ModelError> {
        let z = state.as_scalar();
        let two = R::of(2.0);
        let next = match action.get() {
            1 => {
                if z > R::zero() {
                    R::of(-1.0)
                } else {
                    -two + self.rate * (z + two)
                }
            }
            _ => {
                if z < R::zero() {
                    R::one()
                } else {
                    two + self.rate * (z - two)
                }
            }
        };
        Ok(StateVector::scalar(next))
    }

    fn expected_reward(&self, action: ActionId, state: &StateVector<R>) -> R {
        if action.get() == 1 {
            return R::zero();
        }
        let z = state.as_scalar();
        let two = R::of(2.0);
        if z < two - self.delta {
            R::zero()
        } else {
            self.delta + (z - two)
        }
    }

    fn sample_feasible_state(&self, rng: &mut dyn RngCore) -> StateVector<R> {
        StateVector::scalar(R::of(rng.gen_range(-2.0..=2.0)))
    }

    fn agent_knowledge(&self) -> ConvergenceKnowledge<R> {
        self.knowledge
    }
}
