//! Multi-seed experiment execution.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::config::{
    AlgorithmKind, AlgorithmSpec, EnvironmentSpec, ExperimentConfig, UecbModeSpec,
};
use super::HarnessError;
use crate::agent::Agent;
use crate::baselines::{Exp3Params, Exp3Policy, NaiveParams, NaivePolicy, UcbPolicy};
use crate::envs::{
    build_desk_game_with_sigma, build_paper_game_with, build_paper_sis_with, build_scalar_sis,
    LinearContraction, LowerBoundPair, PaperGameOptions, PaperSisOptions, UcbBreaker,
};
use crate::model::{
    compute_equilibria, default_max_iters, step_environment, Environment,
};
use crate::uecb::{epoch_length, UecbAgent, UecbMode, UecbParams};
use crate::{Equilibria, Scalar, Trajectory};

/// Instantiates the environment an [`EnvironmentSpec`] describes.
pub fn build_environment(
    spec: &EnvironmentSpec,
) -> Result<Box<dyn Environment<Scalar>>, HarnessError> {
    let env: Box<dyn Environment<Scalar>> = match spec {
        EnvironmentSpec::PaperSis {
            seed,
            sigma,
            alpha,
            infection_floor,
            dt,
            init_band,
        } => Box::new(build_paper_sis_with(
            *seed,
            PaperSisOptions {
                sigma: *sigma,
                infection_floor: *infection_floor,
                alpha_lb: *alpha,
                dt: *dt,
                init_band: *init_band,
            },
        )?),
        EnvironmentSpec::ScalarSis {
            beta,
            gamma,
            contact,
            dt,
        } => Box::new(build_scalar_sis(*beta, *gamma, *contact, *dt)?),
        EnvironmentSpec::Linear {
            z_star,
            contraction,
            x_star,
            sigma,
            initial,
        } => {
            let mut builder = LinearContraction::builder();
            for ((z, c), x) in z_star.iter().zip(contraction).zip(x_star) {
                builder = builder.arm(*z, *c, *x);
            }
            Box::new(builder.sigma(*sigma).initial(*initial).build()?)
        }
        EnvironmentSpec::DeskGame {
            players,
            resources,
            actions,
            seed,
            sigma,
        } => Box::new(build_desk_game_with_sigma(
            *players, *resources, *actions, *seed, *sigma,
        )?),
        EnvironmentSpec::PaperGame {
            seed,
            sigma,
            actions,
        } => Box::new(build_paper_game_with(
            *seed,
            PaperGameOptions {
                sigma: *sigma,
                actions: *actions,
            },
        )?),
        EnvironmentSpec::UcbBreaker => Box::new(UcbBreaker::new()),
        EnvironmentSpec::LowerBoundPair { delta, tau_c } => {
            Box::new(LowerBoundPair::new(*delta, *tau_c)?)
        }
    };
    Ok(env)
}

/// Instantiates the policy an [`AlgorithmSpec`] describes.
pub fn build_agent(
    spec: &AlgorithmSpec,
    env: &dyn Environment<Scalar>,
    horizon: u64,
) -> Result<Box<dyn Agent<Scalar>>, HarnessError> {
    let k = env.action_count();
    let agent: Box<dyn Agent<Scalar>> = match &spec.kind {
        AlgorithmKind::Uecb {
            mode,
            rho1,
            rho2,
            tau_c,
            lipschitz,
        } => {
            let declared = env.agent_knowledge();
            // Re-validate after applying config overrides.
            let knowledge = crate::model::ConvergenceKnowledge::new(
                tau_c.unwrap_or(declared.tau_c),
                lipschitz.unwrap_or(declared.lipschitz),
                declared.sigma,
            )?;
            let mode = match mode {
                UecbModeSpec::Noiseless => UecbMode::Noiseless,
                UecbModeSpec::Noisy => UecbMode::Noisy,
            };
            let params = UecbParams::new(*rho1, *rho2, mode, knowledge)?;
            Box::new(UecbAgent::new(k, params))
        }
        AlgorithmKind::Ucb => Box::new(UcbPolicy::new(k, env.noise_sigma())),
        AlgorithmKind::Exp3 { learning_rate } => {
            // An explicit rate runs plain fixed-rate EXP3; the default is
            // the anytime variant via the doubling trick.
            let params = match learning_rate {
                Some(rate) => Exp3Params::new(*rate, None)?,
                None => Exp3Params::anytime(k),
            };
            Box::new(Exp3Policy::new(k, params))
        }
        AlgorithmKind::Rexp3 {
            learning_rate,
            window,
        } => {
            let window =
                window.unwrap_or_else(|| Exp3Params::<Scalar>::default_window(horizon));
            // Rate tuned to the restart window unless given explicitly.
            let rate = learning_rate.unwrap_or_else(|| Exp3Params::default_rate(k, window));
            Box::new(Exp3Policy::new(k, Exp3Params::new(rate, Some(window))?))
        }
        AlgorithmKind::Naive { t_try } => {
            Box::new(NaivePolicy::new(k, NaiveParams::new(*t_try)?))
        }
    };
    Ok(agent)
}

/// The rng stream of realization `seed_index` under a master seed.
pub fn realization_rng(master_seed: u64, seed_index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(master_seed);
    // Stream 0 is reserved for harness-level draws.
    rng.set_stream(seed_index + 1);
    rng
}

/// Drives one policy for exactly `horizon` timesteps and returns the full
/// regret trajectory. Deterministic given the rng state.
pub fn run_realization(
    env: &dyn Environment<Scalar>,
    agent: &mut dyn Agent<Scalar>,
    horizon: u64,
    equilibria: &Equilibria,
    random_init: bool,
    rng: &mut ChaCha8Rng,
) -> Result<Trajectory, HarnessError> {
    let x_opt = equilibria.optimal_reward();
    let mut state = if random_init {
        env.sample_initial_state(rng)
    } else {
        env.initial_state()
    };
    let mut trajectory = Trajectory::new(horizon);
    let mut rewards = Vec::new();
    let mut t = 0u64;
    while t < horizon {
        let (action, block) = agent.next_block(horizon - t, rng);
        let block = block.clamp(1, horizon - t);
        rewards.clear();
        for step in 0..block {
            let out = step_environment(env, action, &state, rng).map_err(|source| {
                HarnessError::Runtime {
                    timestep: t + step + 1,
                    source,
                }
            })?;
            trajectory.record(x_opt, out.expected_reward, out.noisy_reward, action);
            rewards.push(out.noisy_reward);
            state = out.next_state;
        }
        agent.observe_block(action, &rewards);
        t += block;
    }
    Ok(trajectory)
}

/// Pointwise mean and population standard deviation of equal-length curves.
pub fn pointwise_stats(curves: &[&[Scalar]]) -> Result<(Vec<Scalar>, Vec<Scalar>), HarnessError> {
    let first_len = curves
        .first()
        .map(|c| c.len())
        .ok_or_else(|| HarnessError::Invalid("no trajectories to aggregate".into()))?;
    if curves.iter().any(|c| c.len() != first_len) {
        return Err(HarnessError::Invalid(
            "trajectories have mismatched horizons".into(),
        ));
    }
    let n = curves.len() as Scalar;
    let mut mean = vec![0.0; first_len];
    let mut std = vec![0.0; first_len];
    for curve in curves {
        for (m, v) in mean.iter_mut().zip(*curve) {
            *m += v;
        }
    }
    for m in &mut mean {
        *m /= n;
    }
    for curve in curves {
        for ((s, v), m) in std.iter_mut().zip(*curve).zip(&mean) {
            let d = v - m;
            *s += d * d;
        }
    }
    for s in &mut std {
        *s = (*s / n).sqrt();
    }
    Ok((mean, std))
}

/// Per-seed summary for the per-seed CSV.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeedOutcome {
    pub seed: u64,
    pub final_pseudo: Scalar,
    pub final_realized: Scalar,
}

/// Aggregated curves of one algorithm.
#[derive(Debug, Clone)]
pub struct AggregateResult {
    pub label: String,
    pub horizon: u64,
    /// Pointwise mean cumulative pseudo-regret.
    pub mean: Vec<Scalar>,
    /// Pointwise population standard deviation.
    pub std: Vec<Scalar>,
    pub per_seed: Vec<SeedOutcome>,
}

/// Mean/std over complete trajectories.
pub fn aggregate(label: &str, trajectories: &[Trajectory]) -> Result<AggregateResult, HarnessError> {
    let curves: Vec<&[Scalar]> = trajectories.iter().map(|t| t.pseudo()).collect();
    let (mean, std) = pointwise_stats(&curves)?;
    let per_seed = trajectories
        .iter()
        .enumerate()
        .map(|(i, t)| SeedOutcome {
            seed: i as u64,
            final_pseudo: t.final_pseudo(),
            final_realized: t.final_realized(),
        })
        .collect();
    Ok(AggregateResult {
        label: label.to_string(),
        horizon: trajectories[0].horizon(),
        mean,
        std,
        per_seed,
    })
}

/// Everything a finished experiment produced.
#[derive(Debug, Clone)]
pub struct ExperimentOutput {
    pub config: ExperimentConfig,
    pub action_count: usize,
    pub optimal_action: usize,
    pub equilibrium_rewards: Vec<Scalar>,
    pub gaps: Vec<Scalar>,
    pub results: Vec<AggregateResult>,
    pub wall_time_seconds: f64,
    pub config_hash: String,
}

/// FNV-1a over the canonical config rendering.
pub fn config_hash(config: &ExperimentConfig) -> String {
    let text = format!("{config:?}");
    let mut hash: u64 = 0xcbf29ce484222325;
    for byte in text.as_bytes() {
        hash ^= u64::from(*byte);
        hash = hash.wrapping_mul(0x100000001b3);
    }
    format!("{hash:016x}")
}

/// Runs the configured experiment: builds the environment, solves the
/// equilibria for regret accounting, runs every algorithm over every seed
/// (possibly on several worker threads), and aggregates.
pub fn run_experiment(config: &ExperimentConfig) -> Result<ExperimentOutput, HarnessError> {
    let started = std::time::Instant::now();
    let env = build_environment(&config.environment)?;
    let k = env.action_count();

    // Epoch policies need at least one initialization epoch per arm.
    for spec in &config.algorithms {
        if let AlgorithmKind::Uecb { rho1, rho2, mode, .. } = &spec.kind {
            let mode = match mode {
                UecbModeSpec::Noiseless => UecbMode::Noiseless,
                UecbModeSpec::Noisy => UecbMode::Noisy,
            };
            let params = UecbParams::new(*rho1, *rho2, mode, env.agent_knowledge())?;
            let min_len = epoch_length(0, &params)?;
            let needed = min_len * k as u64;
            if config.run.horizon < needed {
                return Err(HarnessError::Invalid(format!(
                    "[algorithm.{}]: horizon {} is below K × first epoch length = {needed}",
                    spec.label, config.run.horizon
                )));
            }
        }
    }

    let tol = config.run.eq_tol;
    let max_iters = default_max_iters(env.agent_knowledge().tau_c, tol);
    let equilibria = compute_equilibria(env.as_ref(), tol, max_iters)?;

    let mut results = Vec::with_capacity(config.algorithms.len());
    for spec in &config.algorithms {
        let trajectories = run_seeds(env.as_ref(), spec, config, &equilibria)?;
        results.push(aggregate(&spec.label, &trajectories)?);
    }

    Ok(ExperimentOutput {
        action_count: k,
        optimal_action: equilibria.optimal_action.get(),
        equilibrium_rewards: equilibria.infos.iter().map(|i| i.x_star).collect(),
        gaps: equilibria.gaps.clone(),
        results,
        wall_time_seconds: started.elapsed().as_secs_f64(),
        config_hash: config_hash(config),
        config: config.clone(),
    })
}

/// All realizations of one algorithm, gathered in seed order regardless of
/// worker scheduling.
fn run_seeds(
    env: &dyn Environment<Scalar>,
    spec: &AlgorithmSpec,
    config: &ExperimentConfig,
    equilibria: &Equilibria,
) -> Result<Vec<Trajectory>, HarnessError> {
    let seeds = config.run.seeds;
    let workers = config.run.workers.max(1).min(seeds as usize);
    let run_one = |seed_index: u64| -> Result<Trajectory, HarnessError> {
        let mut agent = build_agent(spec, env, config.run.horizon)?;
        let mut rng = realization_rng(config.run.master_seed, seed_index);
        run_realization(
            env,
            agent.as_mut(),
            config.run.horizon,
            equilibria,
            config.run.random_init,
            &mut rng,
        )
    };

    if workers <= 1 {
        return (0..seeds).map(run_one).collect();
    }

    let mut slots: Vec<Option<Result<Trajectory, HarnessError>>> =
        (0..seeds).map(|_| None).collect();
    std::thread::scope(|scope| {
        let mut handles = Vec::new();
        for worker in 0..workers {
            let run_one = &run_one;
            handles.push(scope.spawn(move || {
                let mut own = Vec::new();
                let mut seed = worker as u64;
                while seed < seeds {
                    own.push((seed, run_one(seed)));
                    seed += workers as u64;
                }
                own
            }));
        }
        for handle in handles {
            for (seed, outcome) in handle.join().expect("worker panicked") {
                slots[seed as usize] = Some(outcome);
            }
        }
    });
    slots
        .into_iter()
        .map(|slot| slot.expect("every seed ran"))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::ActionId;

    fn linear_spec() -> EnvironmentSpec {
        EnvironmentSpec::Linear {
            z_star: vec![0.2, -0.2],
            contraction: vec![0.5, 0.5],
            x_star: vec![0.9, 0.6],
            sigma: 0.0,
            initial: 0.0,
        }
    }

    fn tiny_config(algorithms: Vec<AlgorithmSpec>) -> ExperimentConfig {
        ExperimentConfig {
            environment: linear_spec(),
            algorithms,
            run: super::super::config::RunSettings {
                horizon: 64,
                seeds: 3,
                master_seed: 5,
                out_dir: "unused".into(),
                record_stride: None,
                random_init: true,
                workers: 1,
                eq_tol: 1e-10,
            },
        }
    }

    fn uecb_spec() -> AlgorithmSpec {
        AlgorithmSpec {
            label: "uecb".into(),
            kind: AlgorithmKind::Uecb {
                mode: UecbModeSpec::Noiseless,
                rho1: std::f64::consts::LN_2,
                rho2: 1.0,
                tau_c: None,
                lipschitz: None,
            },
        }
    }

    #[test]
    fn one_arm_realization_equals_replayed_dynamics() {
        // With a single arm there are no decisions: the pseudo-regret curve
        // is exactly the replayed convergence transient.
        let env = build_environment(&EnvironmentSpec::Linear {
            z_star: vec![0.3],
            contraction: vec![0.8],
            x_star: vec![0.9],
            sigma: 0.0,
            initial: 0.0,
        })
        .unwrap();
        let eq = compute_equilibria(env.as_ref(), 1e-12, 100_000).unwrap();
        let spec = AlgorithmSpec {
            label: "ucb".into(),
            kind: AlgorithmKind::Ucb,
        };
        let mut agent = build_agent(&spec, env.as_ref(), 32).unwrap();
        let mut rng = realization_rng(0, 0);
        let traj = run_realization(env.as_ref(), agent.as_mut(), 32, &eq, false, &mut rng).unwrap();

        let mut z = 0.0f64;
        let mut acc = 0.0;
        for t in 0..32 {
            let reward = 0.9 - (z - 0.3f64).abs();
            acc += eq.optimal_reward() - reward;
            assert!((traj.pseudo()[t] - acc).abs() < 1e-12);
            z = 0.3 + 0.8 * (z - 0.3);
        }
    }

    #[test]
    fn same_seed_is_bit_identical() {
        let cfg = tiny_config(vec![uecb_spec()]);
        let env = build_environment(&cfg.environment).unwrap();
        let eq = compute_equilibria(env.as_ref(), 1e-10, 100_000).unwrap();
        let run = |seed| {
            let mut agent = build_agent(&cfg.algorithms[0], env.as_ref(), 64).unwrap();
            let mut rng = realization_rng(cfg.run.master_seed, seed);
            run_realization(env.as_ref(), agent.as_mut(), 64, &eq, true, &mut rng).unwrap()
        };
        let a = run(1);
        let b = run(1);
        assert_eq!(a, b);
        let c = run(2);
        assert_ne!(a, c, "different streams should differ");
    }

    #[test]
    fn aggregate_matches_hand_arithmetic() {
        // Curves [1,2,3] and [3,2,1] -> mean [2,2,2], std [1,0,1].
        let mut t1 = Trajectory::new(3);
        t1.record(1.0, 0.0, 0.0, ActionId::new(1).unwrap());
        t1.record(1.0, 0.0, 0.0, ActionId::new(1).unwrap());
        t1.record(1.0, 0.0, 0.0, ActionId::new(1).unwrap());
        let mut t2 = Trajectory::new(3);
        t2.record(3.0, 0.0, 0.0, ActionId::new(1).unwrap());
        t2.record(0.0, 1.0, 1.0, ActionId::new(1).unwrap());
        t2.record(0.0, 1.0, 1.0, ActionId::new(1).unwrap());
        assert_eq!(t2.pseudo(), &[3.0, 2.0, 1.0]);
        let agg = aggregate("demo", &[t1, t2]).unwrap();
        assert_eq!(agg.mean, vec![2.0, 2.0, 2.0]);
        assert_eq!(agg.std, vec![1.0, 0.0, 1.0]);
    }

    #[test]
    fn aggregate_of_single_trajectory_has_zero_std() {
        let mut t = Trajectory::new(2);
        t.record(1.0, 0.5, 0.5, ActionId::new(1).unwrap());
        t.record(1.0, 0.5, 0.5, ActionId::new(1).unwrap());
        let agg = aggregate("one", &[t]).unwrap();
        assert!(agg.std.iter().all(|s| *s == 0.0));
    }

    #[test]
    fn aggregate_rejects_mixed_horizons() {
        let mut t1 = Trajectory::new(2);
        t1.record(1.0, 0.0, 0.0, ActionId::new(1).unwrap());
        t1.record(1.0, 0.0, 0.0, ActionId::new(1).unwrap());
        let mut t2 = Trajectory::new(1);
        t2.record(1.0, 0.0, 0.0, ActionId::new(1).unwrap());
        assert!(aggregate("bad", &[t1, t2]).is_err());
    }

    #[test]
    fn workers_do_not_change_results() {
        let mut cfg = tiny_config(vec![uecb_spec()]);
        let sequential = run_experiment(&cfg).unwrap();
        cfg.run.workers = 3;
        let parallel = run_experiment(&cfg).unwrap();
        assert_eq!(sequential.results[0].mean, parallel.results[0].mean);
        assert_eq!(
            sequential.results[0]
                .per_seed
                .iter()
                .map(|s| s.final_pseudo)
                .collect::<Vec<_>>(),
            parallel.results[0]
                .per_seed
                .iter()
                .map(|s| s.final_pseudo)
                .collect::<Vec<_>>()
        );
    }

    #[test]
    fn horizon_below_first_epochs_is_rejected() {
        let mut cfg = tiny_config(vec![uecb_spec()]);
        cfg.run.horizon = 5; // needs K * 4 = 8
        let err = run_experiment(&cfg).unwrap_err();
        assert!(matches!(err, HarnessError::Invalid(_)), "{err}");
    }
}
