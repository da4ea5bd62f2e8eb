use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::linalg::power_iteration;
use crate::model::{
    ActionId, ConvergenceKnowledge, Environment, ModelError, Norm, StateVector,
};
use crate::num::Real;

/// Resource-allocation game driven by simultaneous gradient play.
///
/// `M` players split usage over `d` resources. Player `i`'s utility is
/// `Σ_ℓ γ_{i,ℓ} log(1 + z_i^ℓ) − ζ_{i,ℓ} z_i^ℓ s_ℓ` with the aggregate load
/// `s_ℓ = Σ_i z_i^ℓ`. The agent's action fixes, per player, the subset of
/// resources they may use; masked coordinates stay exactly zero. Each
/// environment step is one round of projected gradient ascent with the
/// exact partial derivative `γ/(1+z) − ζ(s_ℓ + z)`.
///
/// The agent's reward is the sum of utilities, affinely rescaled into
/// `[0, 1]` using its range over the feasible box.
#[derive(Debug, Clone)]
pub struct GameConfig<R> {
    pub players: usize,
    pub resources: usize,
    /// `γ_{i,ℓ}`, row-major `players × resources`.
    pub value_coeff: Vec<R>,
    /// `ζ_{i,ℓ}`, row-major `players × resources`.
    pub price_coeff: Vec<R>,
    /// Gradient-play step size.
    pub step_size: R,
    /// Per-action allowed-resource mask, row-major `players × resources`.
    pub masks: Vec<Vec<bool>>,
    /// Box constraint per coordinate.
    pub z_max: R,
    pub sigma: R,
}

#[derive(Debug, Clone)]
pub struct GameEnvironment<R> {
    cfg: GameConfig<R>,
    dim: usize,
    /// Per-action strong-monotonicity bound (lower bound on λ_a).
    lambda: Vec<R>,
    /// Per-action gradient-Lipschitz bound (upper bound on β_a).
    beta: Vec<R>,
    /// Per-action contraction factor sqrt(1 − 2λα + α²β²).
    contraction: Vec<R>,
    reward_min: R,
    reward_max: R,
    knowledge: ConvergenceKnowledge<R>,
}

/// Contraction factor `sqrt(1 − 2λα + α²β²)` of gradient play with step
/// size `alpha` in a `lambda`-strongly-monotone game with `beta`-Lipschitz
/// stacked gradient. Requires `alpha ≤ 2λ/β²`.
pub fn gradient_play_contraction<R: Real>(
    lambda: R,
    beta: R,
    alpha: R,
) -> Result<R, ModelError> {
    if !(lambda > R::zero() && beta > R::zero()) {
        return Err(ModelError::InvalidInput(
            "lambda and beta must be > 0".into(),
        ));
    }
    if !(alpha > R::zero()) || alpha > R::of(2.0) * lambda / (beta * beta) {
        return Err(ModelError::InvalidInput(format!(
            "step size {alpha} outside (0, 2λ/β² = {}]",
            R::of(2.0) * lambda / (beta * beta)
        )));
    }
    Ok((R::one() - R::of(2.0) * lambda * alpha + alpha * alpha * beta * beta).sqrt())
}

impl<R: Real> GameEnvironment<R> {
    pub fn new(cfg: GameConfig<R>) -> Result<Self, ModelError> {
        let m = cfg.players;
        let d = cfg.resources;
        if m == 0 || d == 0 {
            return Err(ModelError::InvalidInput(
                "need at least one player and one resource".into(),
            ));
        }
        let dim = m * d;
        if cfg.value_coeff.len() != dim || cfg.price_coeff.len() != dim {
            return Err(ModelError::InvalidInput(
                "coefficient tables must be players × resources".into(),
            ));
        }
        if cfg.masks.is_empty() {
            return Err(ModelError::InvalidInput("need at least one action".into()));
        }
        for (a, mask) in cfg.masks.iter().enumerate() {
            if mask.len() != dim {
                return Err(ModelError::InvalidInput(format!(
                    "mask of action {} has wrong length",
                    a + 1
                )));
            }
        }
        if !(cfg.z_max > R::zero()) {
            return Err(ModelError::InvalidInput("z_max must be > 0".into()));
        }
        if !(cfg.sigma >= R::zero()) {
            return Err(ModelError::InvalidInput("sigma must be >= 0".into()));
        }
        for v in cfg.value_coeff.iter().chain(cfg.price_coeff.iter()) {
            if !(*v > R::zero()) {
                return Err(ModelError::InvalidInput(
                    "coefficients must be > 0".into(),
                ));
            }
        }

        let mut lambda = Vec::with_capacity(cfg.masks.len());
        let mut beta = Vec::with_capacity(cfg.masks.len());
        for mask in &cfg.masks {
            let (lam, bet) = monotonicity_bounds(&cfg, mask)?;
            lambda.push(lam);
            beta.push(bet);
        }
        let mut contraction = Vec::with_capacity(cfg.masks.len());
        for a in 0..cfg.masks.len() {
            contraction.push(gradient_play_contraction(
                lambda[a],
                beta[a],
                cfg.step_size,
            )?);
        }
        let c_max = contraction.iter().copied().fold(R::zero(), R::max);
        let tau_c = if c_max >= R::one() {
            return Err(ModelError::InvalidInput(
                "step size yields no contraction".into(),
            ));
        } else {
            (-c_max.ln()).recip().max(R::one())
        };

        // Reward range of Σ u_i over the feasible box: the log terms are
        // nonnegative and the price terms nonpositive.
        let log_cap = (R::one() + cfg.z_max).ln();
        let reward_max: R = cfg.value_coeff.iter().map(|g| *g * log_cap).sum();
        let s_cap = R::of(m as f64) * cfg.z_max;
        let reward_min: R = -cfg
            .price_coeff
            .iter()
            .map(|z| *z * cfg.z_max * s_cap)
            .sum::<R>();
        let range = reward_max - reward_min;
        // Gradient bound of Σ u_i per coordinate, then L2 over the box.
        let zeta_col_sums: Vec<R> = (0..d)
            .map(|l| (0..m).map(|i| cfg.price_coeff[i * d + l]).sum())
            .collect();
        let mut grad_sq = R::zero();
        for i in 0..m {
            for l in 0..d {
                let g = cfg.value_coeff[i * d + l];
                let z = cfg.price_coeff[i * d + l];
                let bound = g + z * s_cap + zeta_col_sums[l] * cfg.z_max;
                grad_sq += bound * bound;
            }
        }
        let lipschitz = grad_sq.sqrt() / range;
        let sigma = cfg.sigma;
        let knowledge = ConvergenceKnowledge::new(tau_c, lipschitz, sigma)?;
        Ok(Self {
            dim,
            lambda,
            beta,
            contraction,
            reward_min,
            reward_max,
            knowledge,
            cfg,
        })
    }

    pub fn config(&self) -> &GameConfig<R> {
        &self.cfg
    }

    /// Strong-monotonicity lower bound λ_a.
    pub fn lambda(&self, action: ActionId) -> R {
        self.lambda[action.zero_based()]
    }

    /// Gradient-Lipschitz upper bound β_a.
    pub fn beta(&self, action: ActionId) -> R {
        self.beta[action.zero_based()]
    }

    /// Declared per-step L2 contraction factor of this action.
    pub fn contraction_factor(&self, action: ActionId) -> R {
        self.contraction[action.zero_based()]
    }

    /// Raw sum of utilities before rescaling.
    pub fn total_utility(&self, state: &[R]) -> R {
        let (m, d) = (self.cfg.players, self.cfg.resources);
        let s = self.aggregate_load(state);
        let mut total = R::zero();
        for i in 0..m {
            for l in 0..d {
                let z = state[i * d + l];
                total += self.cfg.value_coeff[i * d + l] * (R::one() + z).ln()
                    - self.cfg.price_coeff[i * d + l] * z * s[l];
            }
        }
        total
    }

    /// Aggregate load `s_ℓ = Σ_i z_i^ℓ`.
    pub fn aggregate_load(&self, state: &[R]) -> Vec<R> {
        let (m, d) = (self.cfg.players, self.cfg.resources);
        let mut s = vec![R::zero(); d];
        for i in 0..m {
            for (l, sl) in s.iter_mut().enumerate() {
                *sl += state[i * d + l];
            }
        }
        s
    }
}

/// Per-action bounds from the block structure of the stacked-gradient
/// Jacobian: resources decouple, and within resource `ℓ` the block over
/// active players is `J = −diag(γ/(1+z)² + ζ) − ζ 1ᵀ`.
///
/// λ_a: smallest eigenvalue of the symmetrized negated block with the diag
/// evaluated at `z = z_max` (its minimum over the box), per resource, via
/// shifted power iteration; a 1% margin absorbs iteration error.
/// β_a: `max diag + ‖ζ‖·√n` — a closed-form operator-norm upper bound.
fn monotonicity_bounds<R: Real>(
    cfg: &GameConfig<R>,
    mask: &[bool],
) -> Result<(R, R), ModelError> {
    let (m, d) = (cfg.players, cfg.resources);
    let mut lambda = R::infinity();
    let mut beta = R::zero();
    for l in 0..d {
        let active: Vec<usize> = (0..m).filter(|i| mask[i * d + l]).collect();
        let n = active.len();
        if n == 0 {
            continue;
        }
        let gamma: Vec<R> = active.iter().map(|i| cfg.value_coeff[i * d + l]).collect();
        let zeta: Vec<R> = active.iter().map(|i| cfg.price_coeff[i * d + l]).collect();
        let one_plus_zmax_sq = (R::one() + cfg.z_max) * (R::one() + cfg.z_max);
        // Worst-case (smallest) diagonal over the box.
        let diag: Vec<R> = gamma
            .iter()
            .zip(&zeta)
            .map(|(g, z)| *g / one_plus_zmax_sq + *z + *z)
            .collect();
        let zeta_sum: R = zeta.iter().copied().sum();
        // Gershgorin upper bound on the symmetrized block B = D + sym(ζ1ᵀ):
        // row_i = diag_i + Σ_{j≠i} (ζ_i + ζ_j)/2.
        let mut shift = R::zero();
        for i in 0..n {
            let off: R =
                (R::of((n - 1) as f64) * zeta[i] + (zeta_sum - zeta[i])) / R::of(2.0);
            shift = shift.max(diag[i] + off);
        }
        // λ_min(B) = shift − λ_max(shift·I − B).
        let lam_shifted = power_iteration(n, 3000, |v, out| {
            let sum_v: R = v.iter().copied().sum();
            let dot_zeta: R = zeta.iter().zip(v).map(|(z, x)| *z * *x).sum();
            for i in 0..n {
                let bv = diag[i] * v[i] + (zeta[i] * sum_v + dot_zeta) / R::of(2.0);
                out[i] = shift * v[i] - bv;
            }
        });
        let lam_min = (shift - lam_shifted) * R::of(0.99);
        if !(lam_min > R::zero()) {
            return Err(ModelError::InvalidInput(format!(
                "resource {} is not strongly monotone (λ_min ≤ 0)",
                l + 1
            )));
        }
        lambda = lambda.min(lam_min);
        let max_diag_at_zero = gamma
            .iter()
            .zip(&zeta)
            .map(|(g, z)| *g + *z)
            .fold(R::zero(), R::max);
        let zeta_norm = zeta.iter().map(|z| *z * *z).sum::<R>().sqrt();
        beta = beta.max(max_diag_at_zero + zeta_norm * R::of((n as f64).sqrt()));
    }
    if !lambda.is_finite() {
        return Err(ModelError::InvalidInput(
            "action masks leave no active coordinates".into(),
        ));
    }
    Ok((lambda, beta))
}

impl<R: Real> Environment<R> for GameEnvironment<R> {
    fn action_count(&self) -> usize {
        self.cfg.masks.len()
    }

    fn state_dim(&self) -> usize {
        self.dim
    }

    fn initial_state(&self) -> StateVector<R> {
        StateVector::new(vec![R::zero(); self.dim])
    }

    fn norm(&self) -> Norm {
        Norm::L2
    }

    fn noise_sigma(&self) -> R {
        self.cfg.sigma
    }

    fn evolve(&self, action: ActionId, state: &StateVector<R>) -> Result<StateVector<R>, ModelError> {
        let mask = &self.cfg.masks[action.zero_based()];
        let (m, d) = (self.cfg.players, self.cfg.resources);
        let alpha = self.cfg.step_size;
        // Entering the action's feasible set: masked coordinates drop to 0.
        let mut z: Vec<R> = state
            .as_slice()
            .iter()
            .zip(mask.iter())
            .map(|(v, ok)| if *ok { *v } else { R::zero() })
            .collect();
        let s = self.aggregate_load(&z);
        let mut next = vec![R::zero(); self.dim];
        for i in 0..m {
            for l in 0..d {
                let idx = i * d + l;
                if !mask[idx] {
                    continue;
                }
                let grad = self.cfg.value_coeff[idx] / (R::one() + z[idx])
                    - self.cfg.price_coeff[idx] * (s[l] + z[idx]);
                next[idx] = (z[idx] + alpha * grad).max(R::zero()).min(self.cfg.z_max);
            }
        }
        z.copy_from_slice(&next);
        Ok(StateVector::new(z))
    }

    fn expected_reward(&self, _action: ActionId, state: &StateVector<R>) -> R {
        let raw = self.total_utility(state.as_slice());
        let scaled = (raw - self.reward_min) / (self.reward_max - self.reward_min);
        scaled.max(R::zero()).min(R::one())
    }

    fn sample_feasible_state(&self, rng: &mut dyn RngCore) -> StateVector<R> {
        let z_max = self.cfg.z_max.as_f64();
        let values = (0..self.dim)
            .map(|_| R::of(rng.gen_range(0.0..=z_max)))
            .collect();
        StateVector::new(values)
    }

    fn agent_knowledge(&self) -> ConvergenceKnowledge<R> {
        self.knowledge
    }
}

/// Small instance for tests and demos; step size `λ/β²`. Deterministic per
/// seed.
pub fn build_desk_game<R: Real>(
    players: usize,
    resources: usize,
    actions: usize,
    seed: u64,
) -> Result<GameEnvironment<R>, ModelError> {
    build_random_game(players, resources, actions, seed, 0.0)
}

/// [`build_desk_game`] with observation noise.
pub fn build_desk_game_with_sigma<R: Real>(
    players: usize,
    resources: usize,
    actions: usize,
    seed: u64,
    sigma: f64,
) -> Result<GameEnvironment<R>, ModelError> {
    build_random_game(players, resources, actions, seed, sigma)
}

/// Knobs for the 1000-player, 10-resource instance.
#[derive(Debug, Clone, Copy)]
pub struct PaperGameOptions {
    pub sigma: f64,
    pub actions: usize,
}

impl Default for PaperGameOptions {
    fn default() -> Self {
        Self {
            sigma: 0.0,
            actions: 4,
        }
    }
}

/// Builds the 1000-player, 10-resource game with coefficients uniform in
/// `[0.8, 1]` and random per-action resource masks.
pub fn build_paper_game<R: Real>(seed: u64) -> Result<GameEnvironment<R>, ModelError> {
    build_paper_game_with(seed, PaperGameOptions::default())
}

pub fn build_paper_game_with<R: Real>(
    seed: u64,
    opts: PaperGameOptions,
) -> Result<GameEnvironment<R>, ModelError> {
    build_random_game(1000, 10, opts.actions, seed, opts.sigma)
}

fn build_random_game<R: Real>(
    players: usize,
    resources: usize,
    actions: usize,
    seed: u64,
    sigma: f64,
) -> Result<GameEnvironment<R>, ModelError> {
    if actions == 0 {
        return Err(ModelError::InvalidInput("need at least one action".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let dim = players * resources;
    let value_coeff: Vec<R> = (0..dim).map(|_| R::of(rng.gen_range(0.8..=1.0))).collect();
    let price_coeff: Vec<R> = (0..dim).map(|_| R::of(rng.gen_range(0.8..=1.0))).collect();
    let mut masks = Vec::with_capacity(actions);
    for _ in 0..actions {
        let mut mask = vec![false; dim];
        for i in 0..players {
            loop {
                for l in 0..resources {
                    mask[i * resources + l] = rng.gen::<f64>() < 0.6;
                }
                if mask[i * resources..(i + 1) * resources].iter().any(|b| *b) {
                    break;
                }
            }
        }
        masks.push(mask);
    }
    // Provisional config to learn λ and β, then fix the step size at λ/β².
    let provisional = GameConfig {
        players,
        resources,
        value_coeff: value_coeff.clone(),
        price_coeff: price_coeff.clone(),
        step_size: R::of(1e-9),
        masks: masks.clone(),
        z_max: R::of(10.0),
        sigma: R::of(sigma),
    };
    let mut lambda_min = R::infinity();
    let mut beta_max = R::zero();
    for mask in &masks {
        let (lam, bet) = monotonicity_bounds(&provisional, mask)?;
        lambda_min = lambda_min.min(lam);
        beta_max = beta_max.max(bet);
    }
    let step_size = lambda_min / (beta_max * beta_max);
    GameEnvironment::new(GameConfig {
        step_size,
        ..provisional
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{compute_equilibrium, Norm};

    fn single_player_unit() -> GameEnvironment<f64> {
        // One player, one resource, γ = ζ = 1: the Nash point solves
        // 1/(1+z) = 2z, i.e. z* = (√3 − 1)/2.
        GameEnvironment::new(GameConfig {
            players: 1,
            resources: 1,
            value_coeff: vec![1.0],
            price_coeff: vec![1.0],
            step_size: 0.2,
            masks: vec![vec![true]],
            z_max: 10.0,
            sigma: 0.0,
        })
        .unwrap()
    }

    #[test]
    fn single_player_nash_closed_form() {
        let env = single_player_unit();
        let info = compute_equilibrium(&env, ActionId::new(1).unwrap(), 1e-12, 100_000).unwrap();
        let expected = (3.0f64.sqrt() - 1.0) / 2.0;
        assert!((info.z_star.as_scalar() - expected).abs() < 1e-8);
    }

    #[test]
    fn nash_point_is_fixed_under_gradient_play() {
        let env = single_player_unit();
        let z = StateVector::scalar((3.0f64.sqrt() - 1.0) / 2.0);
        let next = env.evolve(ActionId::new(1).unwrap(), &z).unwrap();
        assert!((next.as_scalar() - z.as_scalar()).abs() < 1e-12);
    }

    #[test]
    fn masked_coordinates_stay_zero() {
        let env = build_desk_game::<f64>(4, 3, 2, 9).unwrap();
        let action = ActionId::new(1).unwrap();
        let mask = &env.config().masks[0];
        let mut z = env.initial_state();
        for v in z.as_mut_slice() {
            *v = 0.3;
        }
        for _ in 0..50 {
            z = env.evolve(action, &z).unwrap();
            for (idx, ok) in mask.iter().enumerate() {
                if !*ok {
                    assert_eq!(z.as_slice()[idx], 0.0);
                }
            }
        }
    }

    #[test]
    fn contraction_formula_spot_values() {
        // λ=1, β=1, α=1 collapses in one step; the boundary α = 2λ/β² has
        // factor exactly 1.
        assert_eq!(gradient_play_contraction(1.0f64, 1.0, 1.0).unwrap(), 0.0);
        assert!((gradient_play_contraction(0.5f64, 1.0, 1.0).unwrap() - 1.0).abs() < 1e-12);
        let c = gradient_play_contraction(0.5f64, 1.0, 0.5).unwrap();
        assert!((c - 0.8660254037844386).abs() < 1e-10);
        assert!(gradient_play_contraction(0.5f64, 1.0, 1.5).is_err());
    }

    #[test]
    fn declared_contraction_holds_along_a_trajectory() {
        let env = build_desk_game::<f64>(8, 3, 2, 21).unwrap();
        for action in ActionId::all(2) {
            let eq = compute_equilibrium(&env, action, 1e-11, 2_000_000).unwrap();
            let c = env.contraction_factor(action);
            let mut rng = ChaCha8Rng::seed_from_u64(5);
            let mut z = env.sample_feasible_state(&mut rng);
            for _ in 0..100 {
                let before = Norm::L2.distance(z.as_slice(), eq.z_star.as_slice());
                let next = env.evolve(action, &z).unwrap();
                let after = Norm::L2.distance(next.as_slice(), eq.z_star.as_slice());
                assert!(
                    after <= c * before + 1e-9,
                    "after {after} > c*before {}",
                    c * before
                );
                z = next;
            }
        }
    }

    #[test]
    fn paper_instance_structure_and_determinism() {
        let env = build_paper_game::<f64>(0).unwrap();
        assert_eq!(env.config().players, 1000);
        assert_eq!(env.config().resources, 10);
        assert_eq!(env.action_count(), 4);
        for v in env
            .config()
            .value_coeff
            .iter()
            .chain(env.config().price_coeff.iter())
        {
            assert!((0.8..=1.0).contains(v));
        }
        let d = env.config().resources;
        for mask in &env.config().masks {
            for i in 0..env.config().players {
                assert!(
                    mask[i * d..(i + 1) * d].iter().any(|b| *b),
                    "player {i} locked out of every resource"
                );
            }
        }
        assert!(env.agent_knowledge().tau_c >= 1.0);
        for a in ActionId::all(4) {
            assert!(env.contraction_factor(a) < 1.0);
        }
        let again = build_paper_game::<f64>(0).unwrap();
        assert_eq!(env.config().value_coeff, again.config().value_coeff);
        assert_eq!(env.config().masks, again.config().masks);
    }

    #[test]
    fn aggregate_load_matches_fresh_recomputation() {
        let env = build_desk_game::<f64>(6, 4, 2, 3).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let mut z = env.sample_feasible_state(&mut rng);
        for _ in 0..5 {
            z = env.evolve(ActionId::new(2).unwrap(), &z).unwrap();
        }
        let s = env.aggregate_load(z.as_slice());
        let d = env.config().resources;
        for (l, sl) in s.iter().enumerate() {
            let manual: f64 = (0..env.config().players)
                .map(|i| z.as_slice()[i * d + l])
                .sum();
            assert!((sl - manual).abs() < 1e-9);
        }
    }
}
