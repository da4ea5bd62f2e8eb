use rand::{Rng, RngCore};

use super::{ActionId, EquilibriumSet, ModelError, Norm, StateVector};
use crate::num::Real;

/// Agent-side bounds a policy may consume: an upper bound `tau_c` on the
/// convergence time (per-step contraction factor below `exp(-1/tau_c)`),
/// a Lipschitz constant for the reward in the state, and the subgaussian
/// noise parameter.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConvergenceKnowledge<R> {
    pub tau_c: R,
    pub lipschitz: R,
    pub sigma: R,
}

impl<R: Real> ConvergenceKnowledge<R> {
    pub fn new(tau_c: R, lipschitz: R, sigma: R) -> Result<Self, ModelError> {
        if !(tau_c >= R::one()) {
            return Err(ModelError::InvalidInput(format!(
                "tau_c must be >= 1, got {tau_c}"
            )));
        }
        if !(lipschitz > R::zero()) {
            return Err(ModelError::InvalidInput(format!(
                "lipschitz must be > 0, got {lipschitz}"
            )));
        }
        if !(sigma >= R::zero()) {
            return Err(ModelError::InvalidInput(format!(
                "sigma must be >= 0, got {sigma}"
            )));
        }
        Ok(Self {
            tau_c,
            lipschitz,
            sigma,
        })
    }

    /// Same bounds with a different noise level.
    pub fn with_sigma(mut self, sigma: R) -> Self {
        self.sigma = sigma;
        self
    }

    /// Same bounds with a different convergence time.
    pub fn with_tau_c(mut self, tau_c: R) -> Self {
        self.tau_c = tau_c;
        self
    }
}

/// A controlled dynamical system: deterministic evolution `g`, expected
/// reward `f` in `[0, 1]`, and additive Gaussian observation noise.
///
/// Implementations are immutable after construction; realizations own their
/// state vector and rng, so one environment value can serve many parallel
/// runs.
pub trait Environment<R: Real>: Send + Sync {
    /// Number of actions `K`.
    fn action_count(&self) -> usize;

    /// State dimension `d`.
    fn state_dim(&self) -> usize;

    /// Start state used by runs and by the equilibrium solver.
    fn initial_state(&self) -> StateVector<R>;

    /// Norm the contraction statement is declared in.
    fn norm(&self) -> Norm;

    /// Subgaussian noise parameter of the reward observations.
    fn noise_sigma(&self) -> R;

    /// One evolution step `g(a; z)`.
    fn evolve(&self, action: ActionId, state: &StateVector<R>) -> Result<StateVector<R>, ModelError>;

    /// Expected reward `f(a; z)`.
    fn expected_reward(&self, action: ActionId, state: &StateVector<R>) -> R;

    /// Uniform-ish draw from the environment's feasible set; used by
    /// contraction sweeps.
    fn sample_feasible_state(&self, rng: &mut dyn RngCore) -> StateVector<R>;

    /// Random start state for a realization. Defaults to a feasible-set
    /// draw; environments whose runs naturally start in a particular
    /// region (an epidemic starts small) override this.
    fn sample_initial_state(&self, rng: &mut dyn RngCore) -> StateVector<R> {
        self.sample_feasible_state(rng)
    }

    /// Bounds handed to agents that ask for them.
    fn agent_knowledge(&self) -> ConvergenceKnowledge<R>;
}

impl<R: Real> Environment<R> for Box<dyn Environment<R>> {
    fn action_count(&self) -> usize {
        (**self).action_count()
    }
    fn state_dim(&self) -> usize {
        (**self).state_dim()
    }
    fn initial_state(&self) -> StateVector<R> {
        (**self).initial_state()
    }
    fn norm(&self) -> Norm {
        (**self).norm()
    }
    fn noise_sigma(&self) -> R {
        (**self).noise_sigma()
    }
    fn evolve(&self, action: ActionId, state: &StateVector<R>) -> Result<StateVector<R>, ModelError> {
        (**self).evolve(action, state)
    }
    fn expected_reward(&self, action: ActionId, state: &StateVector<R>) -> R {
        (**self).expected_reward(action, state)
    }
    fn sample_feasible_state(&self, rng: &mut dyn RngCore) -> StateVector<R> {
        (**self).sample_feasible_state(rng)
    }
    fn sample_initial_state(&self, rng: &mut dyn RngCore) -> StateVector<R> {
        (**self).sample_initial_state(rng)
    }
    fn agent_knowledge(&self) -> ConvergenceKnowledge<R> {
        (**self).agent_knowledge()
    }
}

/// What one environment step produced.
#[derive(Debug, Clone, PartialEq)]
pub struct StepOutcome<R> {
    pub next_state: StateVector<R>,
    pub expected_reward: R,
    pub noisy_reward: R,
}

/// Steps the environment once: validates inputs, evolves the state, and
/// draws the noisy observation `y = f(a; z) + N(0, sigma^2)`.
pub fn step_environment<R, E, G>(
    env: &E,
    action: ActionId,
    state: &StateVector<R>,
    rng: &mut G,
) -> Result<StepOutcome<R>, ModelError>
where
    R: Real,
    E: Environment<R> + ?Sized,
    G: Rng + ?Sized,
{
    action.validate(env.action_count())?;
    if state.dim() != env.state_dim() {
        return Err(ModelError::DimensionMismatch {
            expected: env.state_dim(),
            got: state.dim(),
        });
    }
    let expected_reward = env.expected_reward(action, state);
    let next_state = env.evolve(action, state)?;
    let noisy_reward = expected_reward + R::standard_normal(rng) * env.noise_sigma();
    Ok(StepOutcome {
        next_state,
        expected_reward,
        noisy_reward,
    })
}

/// Observed contraction behaviour of one action over sampled states.
#[derive(Debug, Clone)]
pub struct ContractionReport<R> {
    pub action: ActionId,
    /// Smallest observed `‖g(a;z) − z*‖ / ‖z − z*‖`.
    pub min_factor: R,
    /// Largest observed ratio.
    pub max_factor: R,
    /// Declared bound `exp(-1/tau_c)`.
    pub declared_bound: R,
    /// Samples whose ratio exceeded the declared bound plus slack.
    pub violations: usize,
    pub samples: usize,
}

impl<R: Real> ContractionReport<R> {
    pub fn ok(&self) -> bool {
        self.violations == 0
    }
}

/// Samples feasible states and checks the declared one-step contraction
/// `‖g(a;z) − z_a*‖ ≤ exp(-1/tau_c)·‖z − z_a*‖ + slack` for every action.
///
/// The slack is additive: the fixed points are only known up to the
/// equilibrium solver's tolerance, so ratios degenerate near them while
/// the inequality form stays meaningful. The reported min/max factors
/// skip samples closer to the fixed point than `1e-6`.
pub fn check_contraction<R, E, G>(
    env: &E,
    equilibria: &EquilibriumSet<R>,
    samples_per_action: usize,
    slack: R,
    rng: &mut G,
) -> Result<Vec<ContractionReport<R>>, ModelError>
where
    R: Real,
    E: Environment<R> + ?Sized,
    G: RngCore,
{
    let norm = env.norm();
    let bound = (-(env.agent_knowledge().tau_c).recip()).exp();
    let mut reports = Vec::with_capacity(env.action_count());
    for info in &equilibria.infos {
        let z_star = info.z_star.as_slice();
        let mut min_factor = R::infinity();
        let mut max_factor = R::zero();
        let mut violations = 0;
        for _ in 0..samples_per_action {
            let z = env.sample_feasible_state(rng);
            let before = norm.distance(z.as_slice(), z_star);
            let next = env.evolve(info.action, &z)?;
            let after = norm.distance(next.as_slice(), z_star);
            if after > bound * before + slack {
                violations += 1;
            }
            if before > R::of(1e-6) {
                let factor = after / before;
                min_factor = min_factor.min(factor);
                max_factor = max_factor.max(factor);
            }
        }
        reports.push(ContractionReport {
            action: info.action,
            min_factor,
            max_factor,
            declared_bound: bound,
            violations,
            samples: samples_per_action,
        });
    }
    Ok(reports)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::envs::LinearContraction;
    use crate::model::compute_equilibria;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn toy() -> LinearContraction<f64> {
        LinearContraction::builder()
            .arm(0.4, 0.5, 0.9)
            .arm(-0.2, 0.8, 0.6)
            .sigma(0.0)
            .build()
            .unwrap()
    }

    #[test]
    fn step_applies_geometric_map_without_noise() {
        // z* = 0.4, c = 0.5, z = 0 -> next = z* + c (z - z*) = 0.2.
        let env = toy();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let out = step_environment(
            &env,
            ActionId::new(1).unwrap(),
            &StateVector::scalar(0.0),
            &mut rng,
        )
        .unwrap();
        assert!((out.next_state.as_scalar() - 0.2).abs() < 1e-15);
        assert_eq!(out.noisy_reward, out.expected_reward);
    }

    #[test]
    fn step_at_fixed_point_stays_there() {
        let env = toy();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let out = step_environment(
            &env,
            ActionId::new(2).unwrap(),
            &StateVector::scalar(-0.2),
            &mut rng,
        )
        .unwrap();
        assert!((out.next_state.as_scalar() - (-0.2)).abs() < 1e-12);
    }

    #[test]
    fn step_rejects_bad_inputs() {
        let env = toy();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let err = step_environment(
            &env,
            ActionId::new(3).unwrap(),
            &StateVector::scalar(0.0),
            &mut rng,
        )
        .unwrap_err();
        assert!(matches!(err, ModelError::InvalidAction { .. }));

        let err = step_environment(
            &env,
            ActionId::new(1).unwrap(),
            &StateVector::new(vec![0.0, 0.0]),
            &mut rng,
        )
        .unwrap_err();
        assert!(matches!(err, ModelError::DimensionMismatch { .. }));
    }

    #[test]
    fn step_is_deterministic_per_seed() {
        let env = LinearContraction::<f64>::builder()
            .arm(0.4, 0.5, 0.9)
            .sigma(0.3)
            .build()
            .unwrap();
        let mut a = ChaCha8Rng::seed_from_u64(11);
        let mut b = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..32 {
            let x = step_environment(&env, ActionId::new(1).unwrap(), &StateVector::scalar(0.1), &mut a)
                .unwrap();
            let y = step_environment(&env, ActionId::new(1).unwrap(), &StateVector::scalar(0.1), &mut b)
                .unwrap();
            assert_eq!(x.noisy_reward.to_bits(), y.noisy_reward.to_bits());
        }
    }

    #[test]
    fn contraction_sweep_accepts_the_toy_env() {
        let env = toy();
        let eq = compute_equilibria(&env, 1e-10, 10_000).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let reports = check_contraction(&env, &eq, 500, 1e-9, &mut rng).unwrap();
        for r in &reports {
            assert!(r.ok(), "violations on action {}", r.action);
            assert!(r.max_factor <= r.declared_bound + 1e-6);
        }
    }
}
