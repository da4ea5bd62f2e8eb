//! The `eqbandit` command-line interface.
//!
//! ```text
//! eqbandit run        --config <file> [--out <dir>] [--seeds N] [--horizon T]
//! eqbandit equilibria --config <file>
//! eqbandit validate   --config <file> [--samples N] [--dump-matrices <dir>]
//! ```
//!
//! Exit status: 0 success, 1 invalid config or usage, 2 runtime failure
//! (including validation findings).

use std::io::Write as _;
use std::path::{Path, PathBuf};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::config::{parse_config, EnvironmentSpec, ExperimentConfig};
use super::export::{export_results, write_matrix};
use super::runner::{build_environment, run_experiment};
use super::HarnessError;
use crate::envs::{build_paper_sis_with, build_scalar_sis, PaperSisOptions, SisEnvironment};
use crate::model::{check_contraction, compute_equilibria, default_max_iters, Environment};
use crate::{Equilibria, Scalar};

/// Prints to stdout, shrugging off a closed pipe (`eqbandit ... | head`).
macro_rules! outln {
    ($($arg:tt)*) => {
        let _ = writeln!(std::io::stdout(), $($arg)*);
    };
}

const USAGE: &str = "\
usage:
  eqbandit run        --config <file> [--out <dir>] [--seeds N] [--horizon T]
  eqbandit equilibria --config <file>
  eqbandit validate   --config <file> [--samples N] [--dump-matrices <dir>]
";

/// Entry point; returns the process exit status.
pub fn cli_main(args: Vec<String>) -> i32 {
    match dispatch(&args) {
        Ok(()) => 0,
        Err(CliError::Usage(message)) => {
            eprintln!("error: {message}");
            eprint!("{USAGE}");
            1
        }
        Err(CliError::Harness(err)) => {
            eprintln!("error: {err}");
            err.exit_code()
        }
        Err(CliError::ValidationFailed(message)) => {
            eprintln!("validation failed: {message}");
            2
        }
    }
}

enum CliError {
    Usage(String),
    Harness(HarnessError),
    ValidationFailed(String),
}

impl From<HarnessError> for CliError {
    fn from(err: HarnessError) -> Self {
        CliError::Harness(err)
    }
}

struct Flags {
    config: Option<PathBuf>,
    out: Option<PathBuf>,
    seeds: Option<u64>,
    horizon: Option<u64>,
    samples: Option<usize>,
    dump_matrices: Option<PathBuf>,
}

fn parse_flags(args: &[String]) -> Result<Flags, CliError> {
    let mut flags = Flags {
        config: None,
        out: None,
        seeds: None,
        horizon: None,
        samples: None,
        dump_matrices: None,
    };
    let mut it = args.iter();
    while let Some(arg) = it.next() {
        let mut value = |name: &str| {
            it.next()
                .cloned()
                .ok_or_else(|| CliError::Usage(format!("{name} needs a value")))
        };
        match arg.as_str() {
            "--config" => flags.config = Some(PathBuf::from(value("--config")?)),
            "--out" => flags.out = Some(PathBuf::from(value("--out")?)),
            "--seeds" => {
                flags.seeds = Some(value("--seeds")?.parse().map_err(|_| {
                    CliError::Usage("--seeds expects a positive integer".into())
                })?)
            }
            "--horizon" => {
                flags.horizon = Some(value("--horizon")?.parse().map_err(|_| {
                    CliError::Usage("--horizon expects a positive integer".into())
                })?)
            }
            "--samples" => {
                flags.samples = Some(value("--samples")?.parse().map_err(|_| {
                    CliError::Usage("--samples expects a positive integer".into())
                })?)
            }
            "--dump-matrices" => {
                flags.dump_matrices = Some(PathBuf::from(value("--dump-matrices")?))
            }
            other => return Err(CliError::Usage(format!("unknown flag `{other}`"))),
        }
    }
    Ok(flags)
}

fn load_config(flags: &Flags) -> Result<ExperimentConfig, CliError> {
    let path = flags
        .config
        .as_ref()
        .ok_or_else(|| CliError::Usage("--config is required".into()))?;
    let text = std::fs::read_to_string(path).map_err(|e| {
        CliError::Harness(HarnessError::Io {
            path: path.display().to_string(),
            message: e.to_string(),
        })
    })?;
    let mut config = parse_config(&text).map_err(HarnessError::Config)?;
    if flags.seeds == Some(0) || flags.horizon == Some(0) {
        return Err(CliError::Usage("--seeds and --horizon must be >= 1".into()));
    }
    if let Some(seeds) = flags.seeds {
        config.run.seeds = seeds;
    }
    if let Some(horizon) = flags.horizon {
        config.run.horizon = horizon;
    }
    if let Some(out) = &flags.out {
        config.run.out_dir = out.display().to_string();
    }
    Ok(config)
}

fn dispatch(args: &[String]) -> Result<(), CliError> {
    let Some(command) = args.first() else {
        return Err(CliError::Usage("missing subcommand".into()));
    };
    let flags = parse_flags(&args[1..])?;
    match command.as_str() {
        "run" => cmd_run(&flags),
        "equilibria" => cmd_equilibria(&flags),
        "validate" => cmd_validate(&flags),
        other => Err(CliError::Usage(format!("unknown subcommand `{other}`"))),
    }
}

fn cmd_run(flags: &Flags) -> Result<(), CliError> {
    let config = load_config(flags)?;
    let output = run_experiment(&config)?;
    let dir = PathBuf::from(&config.run.out_dir);
    let written = export_results(&output, &dir)?;
    outln!(
        "environment: {} actions, optimal action {}",
        output.action_count, output.optimal_action
    );
    for result in &output.results {
        let last = result.mean.last().copied().unwrap_or(0.0);
        outln!(
            "{:<16} final mean pseudo-regret {:.6} over {} seeds",
            result.label,
            last,
            result.per_seed.len()
        );
    }
    for path in &written {
        outln!("wrote {}", path.display());
    }
    Ok(())
}

fn solve(env: &dyn Environment<Scalar>, config: &ExperimentConfig) -> Result<Equilibria, CliError> {
    let tol = config.run.eq_tol;
    let max_iters = default_max_iters(env.agent_knowledge().tau_c, tol);
    Ok(compute_equilibria(env, tol, max_iters).map_err(HarnessError::Model)?)
}

fn cmd_equilibria(flags: &Flags) -> Result<(), CliError> {
    let config = load_config(flags)?;
    let env = build_environment(&config.environment)?;
    let eq = solve(env.as_ref(), &config)?;
    outln!("action  x_star            gap               iterations");
    for info in &eq.infos {
        let marker = if info.action == eq.optimal_action {
            "  <- optimal"
        } else {
            ""
        };
        outln!(
            "{:<7} {:<17.12} {:<17.12} {}{}",
            info.action,
            info.x_star,
            eq.gap(info.action),
            info.iterations,
            marker
        );
    }
    outln!("optimal action: {}", eq.optimal_action);
    if eq.tied_optimum {
        outln!("warning: optimum is tied; lowest index reported");
    }
    Ok(())
}

fn cmd_validate(flags: &Flags) -> Result<(), CliError> {
    let config = load_config(flags)?;
    let env = build_environment(&config.environment)?;
    let eq = solve(env.as_ref(), &config)?;
    let tol = config.run.eq_tol;
    let mut failures = Vec::new();

    // Fixed-point residuals: g(z*) must stay within 10·tol of z*.
    for info in &eq.infos {
        let moved = env
            .evolve(info.action, &info.z_star)
            .map_err(HarnessError::Model)?;
        let drift = env
            .norm()
            .distance(moved.as_slice(), info.z_star.as_slice());
        outln!(
            "action {}: fixed-point residual {drift:.3e} (tol {tol:.1e})",
            info.action
        );
        if drift > 10.0 * tol {
            failures.push(format!(
                "action {}: fixed point drifts by {drift:.3e}",
                info.action
            ));
        }
    }

    // Contraction sweep against the declared tau_c.
    let samples = flags.samples.unwrap_or(1000);
    let mut rng = ChaCha8Rng::seed_from_u64(config.run.master_seed);
    let reports = check_contraction(env.as_ref(), &eq, samples, 1e-9, &mut rng)
        .map_err(HarnessError::Model)?;
    for report in &reports {
        outln!(
            "action {}: contraction factor over {} samples in [{:.6}, {:.6}], declared bound {:.6}",
            report.action,
            report.samples,
            report.min_factor,
            report.max_factor,
            report.declared_bound
        );
        if !report.ok() {
            failures.push(format!(
                "action {}: {} of {} samples exceed the declared contraction bound",
                report.action, report.violations, report.samples
            ));
        }
    }

    if let Some(dir) = &flags.dump_matrices {
        dump_matrices(&config, dir)?;
    }

    if failures.is_empty() {
        outln!("validation passed");
        Ok(())
    } else {
        Err(CliError::ValidationFailed(failures.join("; ")))
    }
}

fn dump_matrices(config: &ExperimentConfig, dir: &Path) -> Result<(), CliError> {
    let sis: SisEnvironment<Scalar> = match &config.environment {
        EnvironmentSpec::PaperSis {
            seed,
            sigma,
            alpha,
            infection_floor,
            dt,
            init_band,
        } => build_paper_sis_with(
            *seed,
            PaperSisOptions {
                sigma: *sigma,
                infection_floor: *infection_floor,
                alpha_lb: *alpha,
                dt: *dt,
                init_band: *init_band,
            },
        )
        .map_err(HarnessError::Model)?,
        EnvironmentSpec::ScalarSis {
            beta,
            gamma,
            contact,
            dt,
        } => build_scalar_sis(*beta, *gamma, *contact, *dt).map_err(HarnessError::Model)?,
        _ => {
            return Err(CliError::Usage(
                "--dump-matrices only applies to SIS environments".into(),
            ))
        }
    };
    std::fs::create_dir_all(dir).map_err(|e| {
        CliError::Harness(HarnessError::Io {
            path: dir.display().to_string(),
            message: e.to_string(),
        })
    })?;
    for action in crate::model::ActionId::all(sis.action_count()) {
        let path = dir.join(format!("adjacency_a{}.txt", action.get()));
        write_matrix(sis.adjacency(action), &path)?;
        outln!("wrote {}", path.display());
    }
    Ok(())
}
