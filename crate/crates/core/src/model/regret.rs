use super::ActionId;
use crate::num::Real;

/// Cumulative regret of one realization, one entry per timestep.
///
/// Pseudo-regret accumulates `x*_{a*} − x_t` against expected rewards;
/// realized regret accumulates `x*_{a*} − y_t` against the noisy
/// observations. Expectations of the two coincide.
#[derive(Debug, Clone, PartialEq)]
pub struct RegretTrajectory<R> {
    horizon: u64,
    pseudo: Vec<R>,
    realized: Vec<R>,
    actions: Vec<ActionId>,
}

impl<R: Real> RegretTrajectory<R> {
    pub fn new(horizon: u64) -> Self {
        let cap = usize::try_from(horizon).unwrap_or(0);
        Self {
            horizon,
            pseudo: Vec::with_capacity(cap),
            realized: Vec::with_capacity(cap),
            actions: Vec::with_capacity(cap),
        }
    }

    /// Appends one timestep: pseudo increment `x_star_opt − x_t`, realized
    /// increment `x_star_opt − y_t`.
    pub fn record(&mut self, x_star_opt: R, x_t: R, y_t: R, action: ActionId) {
        debug_assert!((self.pseudo.len() as u64) < self.horizon, "past horizon");
        let last_pseudo = self.pseudo.last().copied().unwrap_or_else(R::zero);
        let last_realized = self.realized.last().copied().unwrap_or_else(R::zero);
        self.pseudo.push(last_pseudo + (x_star_opt - x_t));
        self.realized.push(last_realized + (x_star_opt - y_t));
        self.actions.push(action);
    }

    pub fn horizon(&self) -> u64 {
        self.horizon
    }

    /// Timesteps recorded so far.
    pub fn len(&self) -> usize {
        self.pseudo.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pseudo.is_empty()
    }

    pub fn is_complete(&self) -> bool {
        self.pseudo.len() as u64 == self.horizon
    }

    /// Cumulative pseudo-regret per timestep.
    pub fn pseudo(&self) -> &[R] {
        &self.pseudo
    }

    /// Cumulative realized regret per timestep.
    pub fn realized(&self) -> &[R] {
        &self.realized
    }

    pub fn actions(&self) -> &[ActionId] {
        &self.actions
    }

    pub fn final_pseudo(&self) -> R {
        self.pseudo.last().copied().unwrap_or_else(R::zero)
    }

    pub fn final_realized(&self) -> R {
        self.realized.last().copied().unwrap_or_else(R::zero)
    }

    /// Timesteps spent on `action`.
    pub fn time_on(&self, action: ActionId) -> u64 {
        self.actions.iter().filter(|a| **a == action).count() as u64
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn a(i: usize) -> ActionId {
        ActionId::new(i).unwrap()
    }

    #[test]
    fn optimal_at_equilibrium_accrues_nothing() {
        let mut t = RegretTrajectory::<f64>::new(4);
        t.record(1.0, 1.0, 1.0, a(1));
        assert_eq!(t.final_pseudo(), 0.0);
        assert_eq!(t.final_realized(), 0.0);
    }

    #[test]
    fn increments_are_direct_subtractions() {
        let mut t = RegretTrajectory::<f64>::new(4);
        t.record(0.8, 0.5, 0.6, a(2));
        assert!((t.final_pseudo() - 0.3).abs() < 1e-15);
        assert!((t.final_realized() - 0.2).abs() < 1e-15);
        t.record(0.8, 0.5, 0.6, a(2));
        assert!((t.final_pseudo() - 0.6).abs() < 1e-15);
        assert_eq!(t.actions(), &[a(2), a(2)]);
    }

    #[test]
    fn cumulative_sum_matches_replay() {
        // Independent replay of the same increment sequence.
        let steps = [
            (0.9, 0.2, 0.3),
            (0.9, 0.5, 0.4),
            (0.9, 0.9, 1.0),
            (0.9, 0.7, 0.7),
        ];
        let mut t = RegretTrajectory::<f64>::new(steps.len() as u64);
        for (opt, x, y) in steps {
            t.record(opt, x, y, a(1));
        }
        let mut acc = 0.0;
        for (i, (opt, x, _)) in steps.iter().enumerate() {
            acc += opt - x;
            assert!((t.pseudo()[i] - acc).abs() < 1e-15);
        }
        assert!(t.is_complete());
    }
}
