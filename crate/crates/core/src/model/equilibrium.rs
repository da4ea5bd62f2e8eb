use super::{ActionId, Environment, ModelError, StateVector};
use crate::num::Real;

/// Fixed point and equilibrium reward of one action.
#[derive(Debug, Clone)]
pub struct EquilibriumInfo<R> {
    pub action: ActionId,
    /// `z_a*` with `g(a; z_a*) = z_a*` up to tolerance.
    pub z_star: StateVector<R>,
    /// Equilibrium reward `x_a* = f(a, z_a*)`.
    pub x_star: R,
    /// Iterations the solver spent.
    pub iterations: usize,
    /// Last successive-iterate residual.
    pub residual: R,
}

/// Per-action equilibria with the induced optimal action and gaps.
#[derive(Debug, Clone)]
pub struct EquilibriumSet<R> {
    pub infos: Vec<EquilibriumInfo<R>>,
    pub optimal_action: ActionId,
    /// `delta[a] = x*_{a*} − x*_a`, zero at the optimum.
    pub gaps: Vec<R>,
    /// Set when the maximum was not unique (broken toward the lowest index).
    pub tied_optimum: bool,
}

impl<R: Real> EquilibriumSet<R> {
    pub fn optimal_reward(&self) -> R {
        self.infos[self.optimal_action.zero_based()].x_star
    }

    pub fn info(&self, action: ActionId) -> &EquilibriumInfo<R> {
        &self.infos[action.zero_based()]
    }

    pub fn gap(&self, action: ActionId) -> R {
        self.gaps[action.zero_based()]
    }
}

/// Iteration budget that is safe for a geometric rate `exp(-1/tau_c)`:
/// `10 · tau_c · ln(1/tol)`, rounded up.
pub fn default_max_iters(tau_c: f64, tol: f64) -> usize {
    ((10.0 * tau_c * (1.0 / tol).ln()).ceil() as usize).max(1)
}

/// Finds `z_a*` by iterating `z ← g(a; z)` from the environment's initial
/// state until successive iterates are closer than `tol` in the declared
/// norm.
pub fn compute_equilibrium<R, E>(
    env: &E,
    action: ActionId,
    tol: R,
    max_iters: usize,
) -> Result<EquilibriumInfo<R>, ModelError>
where
    R: Real,
    E: Environment<R> + ?Sized,
{
    if !(tol > R::zero()) {
        return Err(ModelError::InvalidInput(format!(
            "tolerance must be > 0, got {tol}"
        )));
    }
    if max_iters == 0 {
        return Err(ModelError::InvalidInput("max_iters must be >= 1".into()));
    }
    action.validate(env.action_count())?;
    let norm = env.norm();
    let mut z = env.initial_state();
    let mut residual = R::infinity();
    for k in 1..=max_iters {
        let next = env.evolve(action, &z)?;
        residual = norm.distance(next.as_slice(), z.as_slice());
        z = next;
        if residual < tol {
            let x_star = env.expected_reward(action, &z);
            return Ok(EquilibriumInfo {
                action,
                z_star: z,
                x_star,
                iterations: k,
                residual,
            });
        }
    }
    Err(ModelError::ConvergenceFailure {
        iterations: max_iters,
        residual: residual.as_f64(),
    })
}

/// Ranks per-action equilibria: the optimum is the largest `x_a*`, ties
/// broken toward the lowest action index and flagged.
pub fn compute_gaps<R: Real>(infos: Vec<EquilibriumInfo<R>>) -> EquilibriumSet<R> {
    assert!(!infos.is_empty(), "need at least one action");
    let mut best = 0usize;
    let mut tied = false;
    for (i, info) in infos.iter().enumerate().skip(1) {
        if info.x_star > infos[best].x_star {
            best = i;
            tied = false;
        } else if info.x_star == infos[best].x_star {
            tied = true;
        }
    }
    let x_best = infos[best].x_star;
    let gaps = infos.iter().map(|info| x_best - info.x_star).collect();
    EquilibriumSet {
        optimal_action: ActionId::from_zero_based(best),
        gaps,
        tied_optimum: tied,
        infos,
    }
}

/// Solves every action and ranks the results.
pub fn compute_equilibria<R, E>(
    env: &E,
    tol: R,
    max_iters: usize,
) -> Result<EquilibriumSet<R>, ModelError>
where
    R: Real,
    E: Environment<R> + ?Sized,
{
    let infos = ActionId::all(env.action_count())
        .map(|a| compute_equilibrium(env, a, tol, max_iters))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(compute_gaps(infos))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::envs::LinearContraction;

    #[test]
    fn closed_form_fixed_point() {
        let env = LinearContraction::<f64>::builder()
            .arm(0.4, 0.5, 0.9)
            .sigma(0.0)
            .build()
            .unwrap();
        let info = compute_equilibrium(&env, ActionId::new(1).unwrap(), 1e-10, 1000).unwrap();
        assert!((info.z_star.as_scalar() - 0.4).abs() < 1e-9);
        assert!((info.x_star - 0.9).abs() < 1e-9);
    }

    #[test]
    fn gap_computation_direct_subtraction() {
        // x* = [0.3, 0.7] -> a* = 2, gaps = [0.4, 0.0].
        let env = LinearContraction::<f64>::builder()
            .arm(0.1, 0.5, 0.3)
            .arm(-0.1, 0.5, 0.7)
            .sigma(0.0)
            .build()
            .unwrap();
        let set = compute_equilibria(&env, 1e-10, 1000).unwrap();
        assert_eq!(set.optimal_action.get(), 2);
        assert!((set.gaps[0] - 0.4).abs() < 1e-9);
        assert!(set.gaps[1].abs() < 1e-12);
        assert!(!set.tied_optimum);
    }

    #[test]
    fn gap_ties_break_to_lowest_index() {
        let env = LinearContraction::<f64>::builder()
            .arm(0.1, 0.5, 0.5)
            .arm(-0.1, 0.5, 0.5)
            .sigma(0.0)
            .build()
            .unwrap();
        let set = compute_equilibria(&env, 1e-12, 1000).unwrap();
        assert_eq!(set.optimal_action.get(), 1);
        assert!(set.tied_optimum);
        assert!(set.gaps.iter().all(|g| g.abs() < 1e-10));
    }

    #[test]
    fn nonconvergence_reports_residual() {
        let env = LinearContraction::<f64>::builder()
            .arm(0.4, 0.999, 0.9)
            .sigma(0.0)
            .build()
            .unwrap();
        let err = compute_equilibrium(&env, ActionId::new(1).unwrap(), 1e-12, 3).unwrap_err();
        match err {
            ModelError::ConvergenceFailure { iterations, residual } => {
                assert_eq!(iterations, 3);
                assert!(residual > 0.0);
            }
            other => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn fixed_point_residual_within_ten_tol() {
        let env = LinearContraction::<f64>::builder()
            .arm(0.25, 0.9, 0.8)
            .sigma(0.0)
            .build()
            .unwrap();
        let tol = 1e-10;
        let info = compute_equilibrium(&env, ActionId::new(1).unwrap(), tol, 100_000).unwrap();
        let moved = env
            .evolve(ActionId::new(1).unwrap(), &info.z_star)
            .unwrap();
        let drift = (moved.as_scalar() - info.z_star.as_scalar()).abs();
        assert!(drift <= 10.0 * tol, "drift {drift}");
    }
}
