//! Plot-ready CSV and metadata output.
//!
//! Per algorithm label `<algo>`:
//!
//! - `regret_<algo>.csv` — header `t,mean_regret,std_regret`, one row per
//!   recorded timestep (`t = 1, 1+stride, …`, final step always included).
//! - `per_seed_<algo>.csv` — header
//!   `seed,final_pseudo_regret,final_realized_regret`, one row per seed.
//!
//! Plus one `meta.json` with the fully resolved configuration.
//!
//! Floats are written in shortest-round-trip decimal form, so parsing a
//! file back yields bit-identical values.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use serde_json::json;

use super::config::{
    AlgorithmKind, EnvironmentSpec, ExperimentConfig, UecbModeSpec,
};
use super::runner::{AggregateResult, ExperimentOutput};
use super::HarnessError;
use crate::Scalar;

fn io_err(path: &Path, source: std::io::Error) -> HarnessError {
    HarnessError::Io {
        path: path.display().to_string(),
        message: source.to_string(),
    }
}

fn fmt_scalar(x: Scalar) -> String {
    format!("{x}")
}

/// Rows to record: 1, 1+stride, … plus the final timestep.
fn recorded_steps(horizon: u64, stride: u64) -> impl Iterator<Item = u64> {
    let stride = stride.max(1);
    (1..=horizon)
        .step_by(stride as usize)
        .chain((horizon > 0 && (horizon - 1) % stride != 0).then_some(horizon))
}

/// Renders `regret_<algo>.csv`.
pub fn render_regret_csv(result: &AggregateResult, stride: u64) -> String {
    let mut body = String::from("t,mean_regret,std_regret\n");
    for t in recorded_steps(result.horizon, stride) {
        let idx = (t - 1) as usize;
        let _ = writeln!(
            body,
            "{t},{},{}",
            fmt_scalar(result.mean[idx]),
            fmt_scalar(result.std[idx])
        );
    }
    body
}

/// Renders `per_seed_<algo>.csv`.
pub fn render_per_seed_csv(result: &AggregateResult) -> String {
    let mut body = String::from("seed,final_pseudo_regret,final_realized_regret\n");
    for seed in &result.per_seed {
        let _ = writeln!(
            body,
            "{},{},{}",
            seed.seed,
            fmt_scalar(seed.final_pseudo),
            fmt_scalar(seed.final_realized)
        );
    }
    body
}

fn environment_json(spec: &EnvironmentSpec) -> serde_json::Value {
    match spec {
        EnvironmentSpec::PaperSis {
            seed,
            sigma,
            alpha,
            infection_floor,
            dt,
            init_band,
        } => json!({
            "kind": "paper_sis",
            "seed": seed,
            "sigma": sigma,
            "alpha": alpha,
            "infection_floor": infection_floor,
            "dt": dt,
            "init_lo": init_band.0,
            "init_hi": init_band.1,
        }),
        EnvironmentSpec::ScalarSis {
            beta,
            gamma,
            contact,
            dt,
        } => json!({
            "kind": "scalar_sis",
            "beta": beta,
            "gamma": gamma,
            "contact": contact,
            "dt": dt,
        }),
        EnvironmentSpec::Linear {
            z_star,
            contraction,
            x_star,
            sigma,
            initial,
        } => json!({
            "kind": "linear",
            "z_star": z_star,
            "contraction": contraction,
            "x_star": x_star,
            "sigma": sigma,
            "initial": initial,
        }),
        EnvironmentSpec::DeskGame {
            players,
            resources,
            actions,
            seed,
            sigma,
        } => json!({
            "kind": "desk_game",
            "players": players,
            "resources": resources,
            "actions": actions,
            "seed": seed,
            "sigma": sigma,
        }),
        EnvironmentSpec::PaperGame {
            seed,
            sigma,
            actions,
        } => json!({
            "kind": "paper_game",
            "seed": seed,
            "sigma": sigma,
            "actions": actions,
        }),
        EnvironmentSpec::UcbBreaker => json!({ "kind": "ucb_breaker" }),
        EnvironmentSpec::LowerBoundPair { delta, tau_c } => json!({
            "kind": "lower_bound_pair",
            "delta": delta,
            "tau_c": tau_c,
        }),
    }
}

fn algorithm_json(kind: &AlgorithmKind) -> serde_json::Value {
    match kind {
        AlgorithmKind::Uecb {
            mode,
            rho1,
            rho2,
            tau_c,
            lipschitz,
        } => json!({
            "kind": "uecb",
            "mode": match mode {
                UecbModeSpec::Noiseless => "noiseless",
                UecbModeSpec::Noisy => "noisy",
            },
            "rho1": rho1,
            "rho2": rho2,
            "tau_c": tau_c,
            "lipschitz": lipschitz,
        }),
        AlgorithmKind::Ucb => json!({ "kind": "ucb" }),
        AlgorithmKind::Exp3 { learning_rate } => json!({
            "kind": "exp3",
            "learning_rate": learning_rate,
        }),
        AlgorithmKind::Rexp3 {
            learning_rate,
            window,
        } => json!({
            "kind": "rexp3",
            "learning_rate": learning_rate,
            "window": window,
        }),
        AlgorithmKind::Naive { t_try } => json!({
            "kind": "naive",
            "t_try": t_try,
        }),
    }
}

fn config_json(config: &ExperimentConfig) -> serde_json::Value {
    json!({
        "environment": environment_json(&config.environment),
        "algorithms": config
            .algorithms
            .iter()
            .map(|a| json!({ "label": a.label, "params": algorithm_json(&a.kind) }))
            .collect::<Vec<_>>(),
        "run": {
            "horizon": config.run.horizon,
            "seeds": config.run.seeds,
            "master_seed": config.run.master_seed,
            "out": config.run.out_dir,
            "record_stride": config.run.stride(),
            "random_init": config.run.random_init,
            "workers": config.run.workers,
            "eq_tol": config.run.eq_tol,
        },
    })
}

/// Renders `meta.json`. The timestamp and wall-time fields vary between
/// runs; everything else is a pure function of config and seed.
pub fn render_meta_json(output: &ExperimentOutput) -> String {
    let timestamp = std::time::SystemTime::now()
        .duration_since(std::time::UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0);
    let value = json!({
        "config": config_json(&output.config),
        "config_hash": output.config_hash,
        "code_version": env!("CARGO_PKG_VERSION"),
        "action_count": output.action_count,
        "optimal_action": output.optimal_action,
        "equilibrium_rewards": output.equilibrium_rewards,
        "gaps": output.gaps,
        "wall_time_seconds": output.wall_time_seconds,
        "timestamp_unix": timestamp,
    });
    let mut text = serde_json::to_string_pretty(&value).expect("static json structure");
    text.push('\n');
    text
}

/// Writes every CSV plus `meta.json` into `dir`, creating it if needed.
/// Returns the written paths.
pub fn export_results(
    output: &ExperimentOutput,
    dir: &Path,
) -> Result<Vec<PathBuf>, HarnessError> {
    fs::create_dir_all(dir).map_err(|e| io_err(dir, e))?;
    let stride = output.config.run.stride();
    let mut written = Vec::new();
    for result in &output.results {
        let regret_path = dir.join(format!("regret_{}.csv", result.label));
        fs::write(&regret_path, render_regret_csv(result, stride))
            .map_err(|e| io_err(&regret_path, e))?;
        written.push(regret_path);
        let per_seed_path = dir.join(format!("per_seed_{}.csv", result.label));
        fs::write(&per_seed_path, render_per_seed_csv(result))
            .map_err(|e| io_err(&per_seed_path, e))?;
        written.push(per_seed_path);
    }
    let meta_path = dir.join("meta.json");
    fs::write(&meta_path, render_meta_json(output)).map_err(|e| io_err(&meta_path, e))?;
    written.push(meta_path);
    Ok(written)
}

/// Writes a matrix as plain text: row-major, space-separated, one row per
/// line.
pub fn write_matrix(
    matrix: &crate::linalg::Matrix<Scalar>,
    path: &Path,
) -> Result<(), HarnessError> {
    let mut body = String::new();
    for i in 0..matrix.size() {
        let row: Vec<String> = matrix.row(i).iter().map(|v| fmt_scalar(*v)).collect();
        let _ = writeln!(body, "{}", row.join(" "));
    }
    fs::write(path, body).map_err(|e| io_err(path, e))
}
