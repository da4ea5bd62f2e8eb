use std::sync::atomic::{AtomicU64, Ordering};

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::linalg::{spectral_radius, Matrix};
use crate::model::{
    ActionId, ConvergenceKnowledge, Environment, ModelError, Norm, StateVector,
};
use crate::num::Real;

/// Networked SIS epidemic under policy control.
///
/// The state is the per-node infected fraction `I ∈ [0,1]^M`. Each action
/// selects a contact matrix `A_a` and infection rate `beta_a`; one
/// environment step applies the Euler map
///
/// `I ← I + (beta_a (1 − diag(I)) A_a I − gamma I) · dt`
///
/// `ceil(1/dt)` times. The agent pays `cost = w0_a + w_a·I`, reported as a
/// reward affinely rescaled into `[0,1]` across all actions.
#[derive(Debug, Clone)]
pub struct SisConfig<R> {
    /// Per-action symmetric nonnegative contact matrix.
    pub adjacency: Vec<Matrix<R>>,
    /// Per-action infection rate `beta_a > 0`.
    pub beta: Vec<R>,
    /// Recovery rate, shared across actions.
    pub gamma: R,
    /// Euler discretization step in `(0, 1)`.
    pub dt: R,
    /// Per-action operational cost `w0_a ∈ (0, 1]`.
    pub w0: Vec<R>,
    /// Per-action health cost weights, entries in `(0, 1]`.
    pub w: Vec<Vec<R>>,
    /// Agent-side lower bound on `beta_a Σ_j A_ij I_j` over the feasible
    /// set; the declared convergence time is `1 / alpha_lb`.
    pub alpha_lb: R,
    /// Feasible-set floor on each node's infected fraction.
    pub infection_floor: R,
    /// Observation noise.
    pub sigma: R,
    /// Start state; defaults to all nodes at 0.5.
    pub initial: Option<Vec<R>>,
    /// Band random realizations start in: an outbreak begins with low
    /// infection levels, far below the endemic equilibria. Must sit
    /// inside the feasible set; defaults to the whole feasible set.
    pub init_band: Option<(R, R)>,
}

#[derive(Debug)]
pub struct SisEnvironment<R> {
    cfg: SisConfig<R>,
    nodes: usize,
    inner_steps: usize,
    /// Affine reward map: reward = (cost_max − cost) / (cost_max − cost_min).
    cost_min: R,
    cost_max: R,
    knowledge: ConvergenceKnowledge<R>,
    /// Times the Euler output had to be clamped back into [0,1]; should
    /// stay zero for a valid dt.
    clamp_events: AtomicU64,
}

impl<R: Real> SisEnvironment<R> {
    pub fn new(cfg: SisConfig<R>) -> Result<Self, ModelError> {
        let k = cfg.adjacency.len();
        if k == 0 {
            return Err(ModelError::InvalidInput("need at least one action".into()));
        }
        if cfg.beta.len() != k || cfg.w0.len() != k || cfg.w.len() != k {
            return Err(ModelError::InvalidInput(
                "per-action parameter lists must have equal length".into(),
            ));
        }
        let nodes = cfg.adjacency[0].size();
        if nodes == 0 {
            return Err(ModelError::InvalidInput("need at least one node".into()));
        }
        if !(cfg.dt > R::zero() && cfg.dt < R::one()) {
            return Err(ModelError::InvalidInput(format!(
                "dt must lie in (0,1), got {}",
                cfg.dt
            )));
        }
        if !(cfg.gamma > R::zero()) {
            return Err(ModelError::InvalidInput("gamma must be > 0".into()));
        }
        if !(cfg.infection_floor > R::zero() && cfg.infection_floor < R::one()) {
            return Err(ModelError::InvalidInput(
                "infection_floor must lie in (0,1)".into(),
            ));
        }
        if !(cfg.sigma >= R::zero()) {
            return Err(ModelError::InvalidInput("sigma must be >= 0".into()));
        }
        let mut min_alpha_true = R::infinity();
        for (a, mat) in cfg.adjacency.iter().enumerate() {
            if mat.size() != nodes {
                return Err(ModelError::InvalidInput(format!(
                    "adjacency {} has size {}, expected {nodes}",
                    a + 1,
                    mat.size()
                )));
            }
            if !mat.is_symmetric(R::of(1e-12)) {
                return Err(ModelError::InvalidInput(format!(
                    "adjacency {} is not symmetric",
                    a + 1
                )));
            }
            for i in 0..nodes {
                for j in 0..nodes {
                    if mat.get(i, j) < R::zero() {
                        return Err(ModelError::InvalidInput(format!(
                            "adjacency {} has negative entry at ({i},{j})",
                            a + 1
                        )));
                    }
                }
            }
            if !(cfg.beta[a] > R::zero()) {
                return Err(ModelError::InvalidInput(format!(
                    "beta {} must be > 0",
                    a + 1
                )));
            }
            // A non-zero stable equilibrium needs beta_a * lambda_max(A_a) > gamma.
            let lambda_max = spectral_radius(mat, 500);
            if !(cfg.beta[a] * lambda_max > cfg.gamma) {
                return Err(ModelError::InvalidInput(format!(
                    "action {}: beta*lambda_max = {} does not exceed gamma = {}",
                    a + 1,
                    cfg.beta[a] * lambda_max,
                    cfg.gamma
                )));
            }
            if cfg.w[a].len() != nodes {
                return Err(ModelError::InvalidInput(format!(
                    "cost weights of action {} have wrong length",
                    a + 1
                )));
            }
            if cfg.w0[a] <= R::zero() || cfg.w0[a] > R::one() {
                return Err(ModelError::InvalidInput(format!(
                    "w0 of action {} outside (0,1]",
                    a + 1
                )));
            }
            for wi in &cfg.w[a] {
                if *wi <= R::zero() || *wi > R::one() {
                    return Err(ModelError::InvalidInput(format!(
                        "cost weight of action {} outside (0,1]",
                        a + 1
                    )));
                }
            }
            let min_row_sum = (0..nodes)
                .map(|i| mat.row_sum(i))
                .fold(R::infinity(), R::min);
            min_alpha_true = min_alpha_true.min(cfg.beta[a] * min_row_sum * cfg.infection_floor);
        }
        if !(cfg.alpha_lb > R::zero() && cfg.alpha_lb <= R::one()) {
            return Err(ModelError::InvalidInput(
                "alpha_lb must lie in (0,1]".into(),
            ));
        }
        // The declared contraction exponent must not claim more than the
        // dynamics deliver on the feasible set.
        if cfg.alpha_lb > min_alpha_true + R::of(1e-15) {
            return Err(ModelError::InvalidInput(format!(
                "alpha_lb = {} exceeds the supported bound {}",
                cfg.alpha_lb, min_alpha_true
            )));
        }
        if let Some(init) = &cfg.initial {
            if init.len() != nodes {
                return Err(ModelError::InvalidInput(
                    "initial state has wrong dimension".into(),
                ));
            }
        }
        if let Some((lo, hi)) = cfg.init_band {
            if !(lo >= cfg.infection_floor && hi <= R::one() && lo < hi) {
                return Err(ModelError::InvalidInput(format!(
                    "init band [{lo}, {hi}] must sit inside the feasible set"
                )));
            }
        }

        let mut cost_min = R::infinity();
        let mut cost_max = R::neg_infinity();
        for a in 0..k {
            let lo = cfg.w0[a];
            let hi = cfg.w0[a] + cfg.w[a].iter().copied().sum::<R>();
            cost_min = cost_min.min(lo);
            cost_max = cost_max.max(hi);
        }
        let range = cost_max - cost_min;
        let max_weight = cfg
            .w
            .iter()
            .flat_map(|wa| wa.iter().copied())
            .fold(R::zero(), R::max);
        let lipschitz = max_weight / range;
        let tau_c = cfg.alpha_lb.recip().max(R::one());
        let knowledge = ConvergenceKnowledge::new(tau_c, lipschitz, cfg.sigma)?;
        let inner_steps = crate::num::ceil_with_snap(cfg.dt.recip().as_f64()) as usize;
        Ok(Self {
            nodes,
            inner_steps,
            cost_min,
            cost_max,
            knowledge,
            clamp_events: AtomicU64::new(0),
            cfg,
        })
    }

    pub fn nodes(&self) -> usize {
        self.nodes
    }

    pub fn config(&self) -> &SisConfig<R> {
        &self.cfg
    }

    pub fn adjacency(&self, action: ActionId) -> &Matrix<R> {
        &self.cfg.adjacency[action.zero_based()]
    }

    /// Euler iterations one environment step applies.
    pub fn inner_steps(&self) -> usize {
        self.inner_steps
    }

    /// Times an Euler output left `[0,1]` and was clamped.
    pub fn clamp_events(&self) -> u64 {
        self.clamp_events.load(Ordering::Relaxed)
    }

    /// One inner Euler step of the discretized dynamics.
    pub fn inner_step(&self, action: ActionId, infected: &[R]) -> Result<Vec<R>, ModelError> {
        let a = action.zero_based();
        let mat = &self.cfg.adjacency[a];
        let beta = self.cfg.beta[a];
        let gamma = self.cfg.gamma;
        let dt = self.cfg.dt;
        let mut pressure = vec![R::zero(); self.nodes];
        mat.mul_vec(infected, &mut pressure);
        let mut next = Vec::with_capacity(self.nodes);
        for i in 0..self.nodes {
            let factor = R::one() - beta * dt * pressure[i];
            if factor <= R::zero() {
                return Err(ModelError::DynamicsInstability {
                    factor: factor.as_f64(),
                    coordinate: i,
                });
            }
            let value = infected[i]
                + (beta * (R::one() - infected[i]) * pressure[i] - gamma * infected[i]) * dt;
            if value < R::zero() || value > R::one() {
                self.clamp_events.fetch_add(1, Ordering::Relaxed);
            }
            next.push(value.max(R::zero()).min(R::one()));
        }
        Ok(next)
    }

    /// Per-inner-step L1 contraction factor `max_i (1 − beta_a dt (A_a I)_i)`
    /// at the given infection vector.
    pub fn contraction_factor(&self, action: ActionId, infected: &[R]) -> R {
        let a = action.zero_based();
        let mat = &self.cfg.adjacency[a];
        let beta = self.cfg.beta[a];
        let dt = self.cfg.dt;
        let mut pressure = vec![R::zero(); self.nodes];
        mat.mul_vec(infected, &mut pressure);
        pressure
            .iter()
            .map(|p| R::one() - beta * dt * *p)
            .fold(R::neg_infinity(), R::max)
    }

    fn cost(&self, action: ActionId, infected: &[R]) -> R {
        let a = action.zero_based();
        let mut c = self.cfg.w0[a];
        for (wi, zi) in self.cfg.w[a].iter().zip(infected) {
            c += *wi * *zi;
        }
        c
    }
}

impl<R: Real> Environment<R> for SisEnvironment<R> {
    fn action_count(&self) -> usize {
        self.cfg.adjacency.len()
    }

    fn state_dim(&self) -> usize {
        self.nodes
    }

    fn initial_state(&self) -> StateVector<R> {
        match &self.cfg.initial {
            Some(init) => StateVector::new(init.clone()),
            None => StateVector::new(vec![R::of(0.5); self.nodes]),
        }
    }

    fn norm(&self) -> Norm {
        Norm::L1
    }

    fn noise_sigma(&self) -> R {
        self.cfg.sigma
    }

    fn evolve(&self, action: ActionId, state: &StateVector<R>) -> Result<StateVector<R>, ModelError> {
        let mut infected = state.as_slice().to_vec();
        for _ in 0..self.inner_steps {
            infected = self.inner_step(action, &infected)?;
        }
        Ok(StateVector::new(infected))
    }

    fn expected_reward(&self, action: ActionId, state: &StateVector<R>) -> R {
        let reward =
            (self.cost_max - self.cost(action, state.as_slice())) / (self.cost_max - self.cost_min);
        reward.max(R::zero()).min(R::one())
    }

    fn sample_feasible_state(&self, rng: &mut dyn RngCore) -> StateVector<R> {
        let floor = self.cfg.infection_floor.as_f64();
        let values = (0..self.nodes)
            .map(|_| R::of(rng.gen_range(floor..=1.0)))
            .collect();
        StateVector::new(values)
    }

    fn sample_initial_state(&self, rng: &mut dyn RngCore) -> StateVector<R> {
        match self.cfg.init_band {
            None => self.sample_feasible_state(rng),
            Some((lo, hi)) => {
                let (lo, hi) = (lo.as_f64(), hi.as_f64());
                let values = (0..self.nodes)
                    .map(|_| R::of(rng.gen_range(lo..=hi)))
                    .collect();
                StateVector::new(values)
            }
        }
    }

    fn agent_knowledge(&self) -> ConvergenceKnowledge<R> {
        self.knowledge
    }
}

/// Single-node instance: infection rate `beta`, contact weight `a`,
/// recovery `gamma`. Its equilibrium has the closed form `1 − gamma/(beta a)`.
pub fn build_scalar_sis<R: Real>(
    beta: R,
    gamma: R,
    contact: R,
    dt: R,
) -> Result<SisEnvironment<R>, ModelError> {
    let floor = R::of(0.05);
    let cfg = SisConfig {
        adjacency: vec![Matrix::from_rows(vec![vec![contact]])],
        beta: vec![beta],
        gamma,
        dt,
        w0: vec![R::of(0.5)],
        w: vec![vec![R::one()]],
        alpha_lb: beta * contact * floor,
        infection_floor: floor,
        sigma: R::zero(),
        initial: None,
        init_band: None,
    };
    SisEnvironment::new(cfg)
}

/// Knobs for the 10-node, 4-action instance.
#[derive(Debug, Clone, Copy)]
pub struct PaperSisOptions {
    pub sigma: f64,
    /// Feasible-set floor on per-node infection.
    pub infection_floor: f64,
    /// Agent-side contraction exponent; `None` derives the supported bound
    /// `min_a beta_a · min_row_sum(A_a) · infection_floor` from the
    /// generated matrices.
    pub alpha_lb: Option<f64>,
    pub dt: f64,
    /// Per-node band realizations start in; outbreaks begin well below the
    /// endemic equilibria.
    pub init_band: (f64, f64),
}

impl Default for PaperSisOptions {
    fn default() -> Self {
        Self {
            sigma: 0.0,
            infection_floor: 0.1,
            alpha_lb: None,
            dt: 0.1,
            init_band: (0.1, 0.15),
        }
    }
}

/// Builds the 10-node, 4-action epidemic instance: recovery 0.01, infection
/// rates 0.011..0.014, random sparse symmetric contact matrices with row
/// sums in `[3, 5]`, and random cost weights in `(0, 1]`. Deterministic per
/// seed.
pub fn build_paper_sis<R: Real>(seed: u64) -> Result<SisEnvironment<R>, ModelError> {
    build_paper_sis_with(seed, PaperSisOptions::default())
}

pub fn build_paper_sis_with<R: Real>(
    seed: u64,
    opts: PaperSisOptions,
) -> Result<SisEnvironment<R>, ModelError> {
    const NODES: usize = 10;
    const ACTIONS: usize = 4;
    let betas = [0.011, 0.012, 0.013, 0.014];
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    let mut adjacency = Vec::with_capacity(ACTIONS);
    for a in 0..ACTIONS {
        adjacency.push(generate_contact_matrix::<R>(&mut rng, NODES).map_err(|e| {
            ModelError::InvalidInput(format!("action {}: {e}", a + 1))
        })?);
    }
    let mut w0 = Vec::with_capacity(ACTIONS);
    let mut w = Vec::with_capacity(ACTIONS);
    for _ in 0..ACTIONS {
        w0.push(R::of(1.0 - rng.gen::<f64>()));
        w.push((0..NODES).map(|_| R::of(1.0 - rng.gen::<f64>())).collect());
    }
    let floor = R::of(opts.infection_floor);
    let alpha_lb = match opts.alpha_lb {
        Some(alpha) => R::of(alpha),
        None => {
            let mut bound = R::infinity();
            for (a, mat) in adjacency.iter().enumerate() {
                let min_row = (0..NODES)
                    .map(|i| mat.row_sum(i))
                    .fold(R::infinity(), R::min);
                bound = bound.min(R::of(betas[a]) * min_row * floor);
            }
            bound
        }
    };
    SisEnvironment::new(SisConfig {
        adjacency,
        beta: betas.iter().map(|b| R::of(*b)).collect(),
        gamma: R::of(0.01),
        dt: R::of(opts.dt),
        w0,
        w,
        alpha_lb,
        infection_floor: floor,
        sigma: R::of(opts.sigma),
        initial: None,
        init_band: Some((R::of(opts.init_band.0), R::of(opts.init_band.1))),
    })
}

/// Random sparse symmetric matrix with zero diagonal and every row sum in
/// `[3, 5]`: Erdos-Renyi mask (edge probability 0.4), uniform edge
/// weights, then symmetric biproportional scaling `A = D W D` toward
/// per-node target row sums drawn in `[3.2, 4.8]`. Draws a fresh mask if
/// the scaling misses the band.
fn generate_contact_matrix<R: Real>(
    rng: &mut ChaCha8Rng,
    nodes: usize,
) -> Result<Matrix<R>, String> {
    const MAX_ATTEMPTS: usize = 200;
    for _ in 0..MAX_ATTEMPTS {
        let mut mat = Matrix::<R>::zeros(nodes);
        for i in 0..nodes {
            for j in (i + 1)..nodes {
                if rng.gen::<f64>() < 0.4 {
                    let weight = R::of(rng.gen_range(0.5..1.0));
                    mat.set(i, j, weight);
                    mat.set(j, i, weight);
                }
            }
        }
        let targets: Vec<R> = (0..nodes).map(|_| R::of(rng.gen_range(3.2..4.8))).collect();
        if (0..nodes).any(|i| mat.row_sum(i) == R::zero()) {
            continue;
        }
        // d_i ← d_i · sqrt(target_i / rowsum_i) keeps A = D W D symmetric
        // while pushing every row sum onto its target.
        let mut scale = vec![R::one(); nodes];
        for _ in 0..60 {
            for i in 0..nodes {
                let mut row = R::zero();
                for j in 0..nodes {
                    row += scale[i] * mat.get(i, j) * scale[j];
                }
                scale[i] *= (targets[i] / row).sqrt();
            }
        }
        let mut scaled = Matrix::<R>::zeros(nodes);
        for i in 0..nodes {
            for j in (i + 1)..nodes {
                let value = scale[i] * mat.get(i, j) * scale[j];
                scaled.set(i, j, value);
                scaled.set(j, i, value);
            }
        }
        if (0..nodes).all(|i| {
            let r = scaled.row_sum(i);
            r >= R::of(3.0) && r <= R::of(5.0)
        }) {
            return Ok(scaled);
        }
    }
    Err(format!(
        "no contact matrix with row sums in [3,5] after {MAX_ATTEMPTS} attempts"
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{compute_equilibrium, step_environment};
    use rand::SeedableRng;

    fn scalar_env() -> SisEnvironment<f64> {
        build_scalar_sis(0.02, 0.01, 1.0, 0.1).unwrap()
    }

    #[test]
    fn zero_infection_is_a_fixed_point() {
        let env = scalar_env();
        let next = env
            .evolve(ActionId::new(1).unwrap(), &StateVector::scalar(0.0))
            .unwrap();
        assert_eq!(next.as_scalar(), 0.0);
    }

    #[test]
    fn scalar_equilibrium_is_fixed() {
        // 1 - gamma/(beta A) = 0.5 is a fixed point of the scalar dynamics.
        let env = scalar_env();
        let next = env
            .evolve(ActionId::new(1).unwrap(), &StateVector::scalar(0.5))
            .unwrap();
        assert!((next.as_scalar() - 0.5).abs() < 1e-15);
    }

    #[test]
    fn inner_step_matches_hand_euler() {
        let env = scalar_env();
        let one = env.inner_step(ActionId::new(1).unwrap(), &[0.25]).unwrap();
        assert!((one[0] - 0.250125).abs() < 1e-15);
    }

    #[test]
    fn outer_step_is_ten_inner_steps() {
        // Scripted re-evaluation of the discretized dynamics.
        let env = scalar_env();
        assert_eq!(env.inner_steps(), 10);
        let mut manual = 0.25f64;
        for _ in 0..10 {
            manual += (0.02 * (1.0 - manual) * manual - 0.01 * manual) * 0.1;
        }
        let outer = env
            .evolve(ActionId::new(1).unwrap(), &StateVector::scalar(0.25))
            .unwrap();
        assert!((outer.as_scalar() - manual).abs() < 1e-12);
    }

    #[test]
    fn scalar_equilibrium_closed_form() {
        let env = scalar_env();
        let info = compute_equilibrium(&env, ActionId::new(1).unwrap(), 1e-10, 1_000_000).unwrap();
        assert!((info.z_star.as_scalar() - 0.5).abs() < 1e-8);
    }

    #[test]
    fn contraction_factor_examples() {
        let env = scalar_env();
        // beta*dt*(A I) = 0.02*0.1*0.5 = 0.001.
        let f = env.contraction_factor(ActionId::new(1).unwrap(), &[0.5]);
        assert!((f - 0.999).abs() < 1e-15);
        // At zero infection there is no contraction.
        let f0 = env.contraction_factor(ActionId::new(1).unwrap(), &[0.0]);
        assert_eq!(f0, 1.0);
    }

    #[test]
    fn paper_instance_has_the_stated_parameters() {
        let env = build_paper_sis::<f64>(7).unwrap();
        assert_eq!(env.action_count(), 4);
        assert_eq!(env.nodes(), 10);
        assert_eq!(env.config().gamma, 0.01);
        assert_eq!(env.config().beta, vec![0.011, 0.012, 0.013, 0.014]);
        for a in ActionId::all(4) {
            let mat = env.adjacency(a);
            assert!(mat.is_symmetric(0.0));
            for i in 0..10 {
                let r = mat.row_sum(i);
                assert!((3.0..=5.0).contains(&r), "row sum {r}");
            }
        }
    }

    #[test]
    fn paper_instance_is_deterministic_per_seed() {
        let a = build_paper_sis::<f64>(123).unwrap();
        let b = build_paper_sis::<f64>(123).unwrap();
        for action in ActionId::all(4) {
            assert_eq!(a.adjacency(action), b.adjacency(action));
        }
        assert_eq!(a.config().w0, b.config().w0);
        assert_eq!(a.config().w, b.config().w);
        let c = build_paper_sis::<f64>(124).unwrap();
        assert_ne!(
            a.adjacency(ActionId::new(1).unwrap()),
            c.adjacency(ActionId::new(1).unwrap())
        );
    }

    #[test]
    fn paper_instance_inner_map_residual_at_equilibria() {
        // No closed form exists at M = 10; the oracle is the residual of
        // the inner Euler map at the solved fixed points.
        let env = build_paper_sis::<f64>(3806).unwrap();
        for a in ActionId::all(4) {
            let info = compute_equilibrium(&env, a, 1e-10, 1_000_000).unwrap();
            let next = env.inner_step(a, info.z_star.as_slice()).unwrap();
            let residual: f64 = next
                .iter()
                .zip(info.z_star.as_slice())
                .map(|(x, y)| (x - y).abs())
                .sum();
            assert!(residual < 1e-8, "action {a}: inner residual {residual}");
        }
    }

    #[test]
    fn paper_instance_has_three_positive_gaps() {
        let env = build_paper_sis::<f64>(3806).unwrap();
        let eq = crate::model::compute_equilibria(&env, 1e-10, 1_000_000).unwrap();
        let positive = eq.gaps.iter().filter(|g| **g > 0.0).count();
        assert_eq!(positive, 3);
        assert!(!eq.tied_optimum);
    }

    #[test]
    fn unstable_discretization_is_reported() {
        // beta·dt·(A I) > 1 flips the Euler factor negative.
        let cfg = SisConfig {
            adjacency: vec![Matrix::from_rows(vec![vec![20.0f64]])],
            beta: vec![0.9],
            gamma: 0.01,
            dt: 0.5,
            w0: vec![0.5],
            w: vec![vec![0.5]],
            alpha_lb: 0.5,
            infection_floor: 0.1,
            sigma: 0.0,
            initial: None,
            init_band: None,
        };
        let env = SisEnvironment::new(cfg).unwrap();
        let err = env
            .evolve(ActionId::new(1).unwrap(), &StateVector::scalar(0.5))
            .unwrap_err();
        assert!(matches!(err, ModelError::DynamicsInstability { .. }));
    }

    #[test]
    fn rejects_unsupported_alpha_claim() {
        let err = build_paper_sis_with::<f64>(
            7,
            PaperSisOptions {
                alpha_lb: Some(0.5),
                ..PaperSisOptions::default()
            },
        )
        .unwrap_err();
        assert!(matches!(err, ModelError::InvalidInput(_)));
    }

    #[test]
    fn noise_draw_uses_the_seeded_stream() {
        let env = build_paper_sis_with::<f64>(
            7,
            PaperSisOptions {
                sigma: 0.05,
                ..PaperSisOptions::default()
            },
        )
        .unwrap();
        let z = env.initial_state();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(1);
        let out = step_environment(&env, ActionId::new(2).unwrap(), &z, &mut rng).unwrap();
        assert_ne!(out.noisy_reward, out.expected_reward);
        assert!((out.noisy_reward - out.expected_reward).abs() < 1.0);
    }
}
