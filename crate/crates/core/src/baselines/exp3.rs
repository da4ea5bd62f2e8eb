use rand::{Rng, RngCore};

use super::BaselineError;
use crate::agent::Agent;
use crate::model::ActionId;
use crate::num::Real;

/// Weights above this trigger a uniform rescale; probabilities are
/// unaffected and weights stay finite over arbitrarily long runs.
const RESCALE_THRESHOLD: f64 = 1e100;

/// Exponential-weights parameters.
///
/// A set `restart_window` makes the policy restarting (weights reset to
/// one every `restart_window` steps). With `anytime_doubling`, runs are
/// split into segments `[2^j, 2^{j+1})`; each segment restarts the
/// weights and uses the rate tuned to its own length.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Exp3Params<R> {
    pub learning_rate: R,
    pub restart_window: Option<u64>,
    pub anytime_doubling: bool,
}

impl<R: Real> Exp3Params<R> {
    pub fn new(learning_rate: R, restart_window: Option<u64>) -> Result<Self, BaselineError> {
        if !(learning_rate > R::zero()) {
            return Err(BaselineError::InvalidInput(format!(
                "learning rate must be > 0, got {learning_rate}"
            )));
        }
        if restart_window == Some(0) {
            return Err(BaselineError::InvalidInput(
                "restart window must be >= 1".into(),
            ));
        }
        Ok(Self {
            learning_rate,
            restart_window,
            anytime_doubling: false,
        })
    }

    /// Horizon-free default: `sqrt(2·ln K/(K·T))` applied through the
    /// doubling trick.
    pub fn anytime(action_count: usize) -> Self {
        Self {
            learning_rate: Self::default_rate(action_count, 1),
            restart_window: None,
            anytime_doubling: true,
        }
    }

    /// Horizon-tuned rate `sqrt(2·ln K / (K·T))`.
    pub fn default_rate(action_count: usize, horizon: u64) -> R {
        let k = action_count.max(2) as f64;
        let t = horizon.max(1) as f64;
        R::of((2.0 * k.ln() / (k * t)).sqrt())
    }

    /// Restart window `T^{2/3}`, rounded.
    pub fn default_window(horizon: u64) -> u64 {
        ((horizon.max(1) as f64).powf(2.0 / 3.0).round() as u64).max(1)
    }
}

/// Sampling distribution induced by the weights.
pub fn exp3_probabilities<R: Real>(weights: &[R]) -> Vec<R> {
    let total: R = weights.iter().copied().sum();
    weights.iter().map(|w| *w / total).collect()
}

/// One importance-weighted exponential update:
/// `w[played] ·= exp(rate · (reward / p[played]) / K)` with the reward
/// clamped into `[0, 1]`. Rescales all weights when they grow large.
pub fn exp3_update<R: Real>(
    weights: &[R],
    played: ActionId,
    reward: R,
    probs: &[R],
    params: &Exp3Params<R>,
) -> Vec<R> {
    debug_assert_eq!(weights.len(), probs.len());
    let k = R::of(weights.len() as f64);
    let clamped = reward.max(R::zero()).min(R::one());
    let estimate = clamped / probs[played.zero_based()];
    let mut next: Vec<R> = weights.to_vec();
    next[played.zero_based()] =
        next[played.zero_based()] * (params.learning_rate * estimate / k).exp();
    let max = next.iter().copied().fold(R::zero(), R::max);
    if max > R::of(RESCALE_THRESHOLD) {
        for w in &mut next {
            *w = (*w / max).max(R::min_positive_value());
        }
    }
    next
}

/// Per-step EXP3/REXP3 agent.
#[derive(Debug, Clone)]
pub struct Exp3Policy<R> {
    params: Exp3Params<R>,
    weights: Vec<R>,
    /// Effective rate of the current segment.
    rate: R,
    t: u64,
}

impl<R: Real> Exp3Policy<R> {
    pub fn new(action_count: usize, params: Exp3Params<R>) -> Self {
        Self {
            rate: params.learning_rate,
            params,
            weights: vec![R::one(); action_count],
            t: 0,
        }
    }

    pub fn weights(&self) -> &[R] {
        &self.weights
    }

    fn reset_weights(&mut self) {
        self.weights.iter_mut().for_each(|w| *w = R::one());
    }

    fn sample(&self, probs: &[R], rng: &mut dyn RngCore) -> ActionId {
        let u = R::of(rng.gen::<f64>());
        let mut acc = R::zero();
        for (i, p) in probs.iter().enumerate() {
            acc += *p;
            if u < acc {
                return ActionId::from_zero_based(i);
            }
        }
        ActionId::from_zero_based(probs.len() - 1)
    }
}

impl<R: Real> Agent<R> for Exp3Policy<R> {
    fn next_block(&mut self, _remaining: u64, rng: &mut dyn RngCore) -> (ActionId, u64) {
        let t = self.t + 1;
        if let Some(window) = self.params.restart_window {
            if t > 1 && (t - 1) % window == 0 {
                self.reset_weights();
            }
        }
        if self.params.anytime_doubling && t.is_power_of_two() {
            self.reset_weights();
            self.rate = Exp3Params::default_rate(self.weights.len(), t);
        }
        let probs = exp3_probabilities(&self.weights);
        (self.sample(&probs, rng), 1)
    }

    fn observe_block(&mut self, action: ActionId, rewards: &[R]) {
        debug_assert_eq!(rewards.len(), 1);
        let probs = exp3_probabilities(&self.weights);
        let step = Exp3Params {
            learning_rate: self.rate,
            ..self.params
        };
        self.weights = exp3_update(&self.weights, action, rewards[0], &probs, &step);
        self.t += 1;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn params(rate: f64) -> Exp3Params<f64> {
        Exp3Params::new(rate, None).unwrap()
    }

    #[test]
    fn uniform_start() {
        let w = vec![1.0f64; 4];
        let p = exp3_probabilities(&w);
        assert!(p.iter().all(|x| (*x - 0.25).abs() < 1e-15));
    }

    #[test]
    fn zero_reward_leaves_weights() {
        let w = vec![1.0f64, 2.0];
        let probs = exp3_probabilities(&w);
        let next = exp3_update(&w, ActionId::new(1).unwrap(), 0.0, &probs, &params(0.3));
        assert_eq!(next, w);
    }

    #[test]
    fn one_step_update_hand_oracle() {
        // K=2, uniform weights, play arm 1 at p=0.5 with reward 1:
        // new weight = exp(rate·(1/0.5)/2) = exp(rate).
        let rate = 0.17;
        let w = vec![1.0f64, 1.0];
        let probs = exp3_probabilities(&w);
        let next = exp3_update(&w, ActionId::new(1).unwrap(), 1.0, &probs, &params(rate));
        assert!((next[0] - rate.exp()).abs() < 1e-15);
        assert_eq!(next[1], 1.0);
    }

    #[test]
    fn weights_stay_finite_and_positive_over_long_runs() {
        let p = params(0.8);
        let mut w = vec![1.0f64, 1.0, 1.0];
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for t in 0..1_000_000u64 {
            let probs = exp3_probabilities(&w);
            let sum: f64 = probs.iter().sum();
            assert!((sum - 1.0).abs() < 1e-12, "probabilities sum {sum} at {t}");
            assert!(probs.iter().all(|x| *x >= 0.0));
            let arm = ActionId::from_zero_based((t % 3) as usize);
            let reward = rng.gen::<f64>();
            w = exp3_update(&w, arm, reward, &probs, &p);
            assert!(w.iter().all(|x| x.is_finite() && *x > 0.0), "at {t}");
        }
    }

    #[test]
    fn restart_makes_sampling_uniform_on_window_boundaries() {
        let window = 16u64;
        let p = Exp3Params::new(0.9, Some(window)).unwrap();
        let mut policy = Exp3Policy::<f64>::new(3, p);
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for t in 1..=64u64 {
            let (a, _) = policy.next_block(1000, &mut rng);
            if (t - 1) % window == 0 {
                let probs = exp3_probabilities(policy.weights());
                assert!(
                    probs.iter().all(|x| (*x - 1.0 / 3.0).abs() < 1e-12),
                    "not uniform at t = {t}"
                );
            }
            policy.observe_block(a, &[0.9]);
        }
    }

    #[test]
    fn invalid_parameters_rejected() {
        assert!(Exp3Params::new(0.0f64, None).is_err());
        assert!(Exp3Params::new(0.1f64, Some(0)).is_err());
    }
}
