use rand::RngCore;

use super::BaselineError;
use crate::agent::Agent;
use crate::model::ActionId;
use crate::num::Real;

/// Try-then-commit: play every arm `t_try` consecutive steps, then commit
/// to the arm whose final exploration reward was best.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct NaiveParams {
    pub t_try: u64,
}

impl NaiveParams {
    pub fn new(t_try: u64) -> Result<Self, BaselineError> {
        if t_try == 0 {
            return Err(BaselineError::InvalidInput("t_try must be >= 1".into()));
        }
        Ok(Self { t_try })
    }
}

/// Arm played at (one-based) timestep `t`: block `⌈t/t_try⌉` during
/// exploration, the committed arm afterwards.
pub fn naive_select(
    t: u64,
    action_count: usize,
    params: &NaiveParams,
    committed: Option<ActionId>,
) -> ActionId {
    debug_assert!(t >= 1);
    let k = action_count as u64;
    if t <= k * params.t_try {
        let block = t.div_ceil(params.t_try);
        ActionId::new(block as usize).expect("block >= 1")
    } else {
        committed.expect("exploration over, commitment decided")
    }
}

/// Stateful wrapper recording each arm's last exploration reward and the
/// resulting commitment.
#[derive(Debug, Clone)]
pub struct NaivePolicy<R> {
    params: NaiveParams,
    action_count: usize,
    t: u64,
    final_rewards: Vec<Option<R>>,
    committed: Option<ActionId>,
}

impl<R: Real> NaivePolicy<R> {
    pub fn new(action_count: usize, params: NaiveParams) -> Self {
        Self {
            params,
            action_count,
            t: 0,
            final_rewards: vec![None; action_count],
            committed: None,
        }
    }

    pub fn committed(&self) -> Option<ActionId> {
        self.committed
    }
}

impl<R: Real> Agent<R> for NaivePolicy<R> {
    fn next_block(&mut self, _remaining: u64, _rng: &mut dyn RngCore) -> (ActionId, u64) {
        (
            naive_select(self.t + 1, self.action_count, &self.params, self.committed),
            1,
        )
    }

    fn observe_block(&mut self, action: ActionId, rewards: &[R]) {
        debug_assert_eq!(rewards.len(), 1);
        self.t += 1;
        let t_try = self.params.t_try;
        let k = self.action_count as u64;
        if self.t <= k * t_try && self.t % t_try == 0 {
            self.final_rewards[action.zero_based()] = rewards.last().copied();
        }
        if self.t == k * t_try {
            let mut best = 0usize;
            for i in 1..self.action_count {
                if self.final_rewards[i] > self.final_rewards[best] {
                    best = i;
                }
            }
            self.committed = Some(ActionId::from_zero_based(best));
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn block_schedule() {
        let p = NaiveParams::new(3).unwrap();
        assert_eq!(naive_select(1, 2, &p, None).get(), 1);
        assert_eq!(naive_select(3, 2, &p, None).get(), 1);
        assert_eq!(naive_select(4, 2, &p, None).get(), 2);
        assert_eq!(naive_select(6, 2, &p, None).get(), 2);
        let committed = ActionId::new(2).unwrap();
        assert_eq!(naive_select(7, 2, &p, Some(committed)).get(), 2);
    }

    #[test]
    fn commits_to_best_final_reward() {
        // Final rewards (0.2, 0.8) at the ends of the exploration blocks.
        let mut policy = NaivePolicy::<f64>::new(2, NaiveParams::new(3).unwrap());
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let rewards = [0.0, 0.1, 0.2, 0.0, 0.4, 0.8, 0.5];
        for r in rewards {
            let (a, len) = policy.next_block(10, &mut rng);
            assert_eq!(len, 1);
            policy.observe_block(a, &[r]);
        }
        assert_eq!(policy.committed(), Some(ActionId::new(2).unwrap()));
        let (a, _) = policy.next_block(10, &mut rng);
        assert_eq!(a.get(), 2);
    }

    #[test]
    fn exploration_lasts_exactly_k_t_try_steps() {
        let k = 3usize;
        let t_try = 4u64;
        let mut policy = NaivePolicy::<f64>::new(k, NaiveParams::new(t_try).unwrap());
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let mut sequence = Vec::new();
        for t in 0..30 {
            let (a, _) = policy.next_block(100, &mut rng);
            sequence.push(a.get());
            policy.observe_block(a, &[t as f64 * 0.01]);
        }
        // First K·t_try steps sweep the arms in blocks, then a constant arm.
        for (i, arm) in sequence.iter().enumerate().take((k as u64 * t_try) as usize) {
            assert_eq!(*arm, i / t_try as usize + 1);
        }
        let tail: Vec<usize> = sequence[(k as u64 * t_try) as usize..].to_vec();
        assert!(tail.windows(2).all(|w| w[0] == w[1]));
    }

    #[test]
    fn rejects_zero_t_try() {
        assert!(NaiveParams::new(0).is_err());
    }

    /// Two arms, one converging fast to a mediocre reward and one slowly
    /// to a good one: a small trial budget commits to the fast arm, a
    /// large one to the slow arm.
    #[test]
    fn trial_budget_decides_the_commitment() {
        use crate::envs::LinearContraction;
        use crate::model::{step_environment, Environment};

        let env = LinearContraction::<f64>::builder()
            .arm(0.0, 0.3, 0.6)
            .arm(0.4, 0.99, 0.9)
            .sigma(0.0)
            .initial(0.0)
            .build()
            .unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let mut drive = |t_try: u64, steps: u64| {
            let mut policy = NaivePolicy::<f64>::new(2, NaiveParams::new(t_try).unwrap());
            let mut z = env.initial_state();
            for _ in 0..steps {
                let (a, _) = policy.next_block(steps, &mut rng);
                let out = step_environment(&env, a, &z, &mut rng).unwrap();
                policy.observe_block(a, &[out.noisy_reward]);
                z = out.next_state;
            }
            policy.committed().unwrap()
        };
        assert_eq!(drive(2, 10).get(), 1, "short trials commit to the fast arm");
        assert_eq!(drive(1000, 2100).get(), 2, "long trials find the slow arm");
    }
}
