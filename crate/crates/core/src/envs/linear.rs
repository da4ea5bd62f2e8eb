use rand::{Rng, RngCore};

use crate::model::{
    ActionId, ConvergenceKnowledge, Environment, ModelError, Norm, StateVector,
};
use crate::num::Real;

/// One arm of a scalar linear contraction: `g(a; z) = z* + c (z − z*)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinearArm<R> {
    /// Fixed point, inside the feasible interval `[-0.5, 0.5]`.
    pub z_star: R,
    /// Contraction factor in `(0, 1)`.
    pub contraction: R,
    /// Equilibrium reward in `[0, 1]`.
    pub x_star: R,
}

/// Scalar environment with per-arm geometric convergence and the
/// distance-shaped reward `f(a; z) = clamp(x_a* − |z − z_a*|, 0, 1)`,
/// which is 1-Lipschitz and peaks at the fixed point.
#[derive(Debug, Clone)]
pub struct LinearContraction<R> {
    arms: Vec<LinearArm<R>>,
    sigma: R,
    initial: R,
    knowledge: ConvergenceKnowledge<R>,
}

/// Builder for [`LinearContraction`].
#[derive(Debug, Clone, Default)]
pub struct LinearContractionBuilder<R> {
    arms: Vec<LinearArm<R>>,
    sigma: Option<R>,
    initial: Option<R>,
    tau_c: Option<R>,
}

impl<R: Real> LinearContractionBuilder<R> {
    pub fn arm(mut self, z_star: R, contraction: R, x_star: R) -> Self {
        self.arms.push(LinearArm {
            z_star,
            contraction,
            x_star,
        });
        self
    }

    pub fn sigma(mut self, sigma: R) -> Self {
        self.sigma = Some(sigma);
        self
    }

    pub fn initial(mut self, z0: R) -> Self {
        self.initial = Some(z0);
        self
    }

    /// Overrides the declared convergence time; must still upper-bound
    /// every arm's true one.
    pub fn tau_c(mut self, tau_c: R) -> Self {
        self.tau_c = Some(tau_c);
        self
    }

    pub fn build(self) -> Result<LinearContraction<R>, ModelError> {
        let half = R::of(0.5);
        if self.arms.is_empty() {
            return Err(ModelError::InvalidInput("need at least one arm".into()));
        }
        for (i, arm) in self.arms.iter().enumerate() {
            if !(arm.contraction > R::zero() && arm.contraction < R::one()) {
                return Err(ModelError::InvalidInput(format!(
                    "arm {}: contraction {} outside (0, 1)",
                    i + 1,
                    arm.contraction
                )));
            }
            if arm.z_star.abs() > half {
                return Err(ModelError::InvalidInput(format!(
                    "arm {}: fixed point {} outside [-0.5, 0.5]",
                    i + 1,
                    arm.z_star
                )));
            }
            if arm.x_star < R::zero() || arm.x_star > R::one() {
                return Err(ModelError::InvalidInput(format!(
                    "arm {}: equilibrium reward {} outside [0, 1]",
                    i + 1,
                    arm.x_star
                )));
            }
        }
        let sigma = self.sigma.unwrap_or_else(R::zero);
        if sigma < R::zero() {
            return Err(ModelError::InvalidInput("sigma must be >= 0".into()));
        }
        let initial = self.initial.unwrap_or_else(R::zero);
        if initial.abs() > half {
            return Err(ModelError::InvalidInput(
                "initial state outside [-0.5, 0.5]".into(),
            ));
        }
        // tau_c with exp(-1/tau_c) = c_max, floored at 1.
        let c_max = self
            .arms
            .iter()
            .map(|a| a.contraction)
            .fold(R::zero(), R::max);
        let tau_implied = (-c_max.ln()).recip().max(R::one());
        let tau_c = match self.tau_c {
            Some(t) => {
                if t < tau_implied - R::of(1e-12) {
                    return Err(ModelError::InvalidInput(format!(
                        "declared tau_c {t} below the implied {tau_implied}"
                    )));
                }
                t
            }
            None => tau_implied,
        };
        let knowledge = ConvergenceKnowledge::new(tau_c, R::one(), sigma)?;
        Ok(LinearContraction {
            arms: self.arms,
            sigma,
            initial,
            knowledge,
        })
    }
}

impl<R: Real> LinearContraction<R> {
    pub fn builder() -> LinearContractionBuilder<R> {
        LinearContractionBuilder {
            arms: Vec::new(),
            sigma: None,
            initial: None,
            tau_c: None,
        }
    }

    pub fn arm(&self, action: ActionId) -> &LinearArm<R> {
        &self.arms[action.zero_based()]
    }
}

impl<R: Real> Environment<R> for LinearContraction<R> {
    fn action_count(&self) -> usize {
        self.arms.len()
    }

    fn state_dim(&self) -> usize {
        1
    }

    fn initial_state(&self) -> StateVector<R> {
        StateVector::scalar(self.initial)
    }

    fn norm(&self) -> Norm {
        Norm::L1
    }

    fn noise_sigma(&self) -> R {
        self.sigma
    }

    fn evolve(&self, action: ActionId, state: &StateVector<R>) -> Result<StateVector<R>, ModelError> {
        let arm = &self.arms[action.zero_based()];
        let z = state.as_scalar();
        Ok(StateVector::scalar(
            arm.z_star + arm.contraction * (z - arm.z_star),
        ))
    }

    fn expected_reward(&self, action: ActionId, state: &StateVector<R>) -> R {
        let arm = &self.arms[action.zero_based()];
        let raw = arm.x_star - (state.as_scalar() - arm.z_star).abs();
        raw.max(R::zero()).min(R::one())
    }

    fn sample_feasible_state(&self, rng: &mut dyn RngCore) -> StateVector<R> {
        let u: f64 = rng.gen_range(-0.5..=0.5);
        StateVector::scalar(R::of(u))
    }

    fn agent_knowledge(&self) -> ConvergenceKnowledge<R> {
        self.knowledge
    }
}
