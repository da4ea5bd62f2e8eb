//! Flat sectioned config files.
//!
//! ```text
//! # comment
//! [environment]
//! kind = paper_sis
//! seed = 7
//!
//! [algorithm.uecb]
//! mode = noisy
//!
//! [run]
//! horizon = 50000
//! ```
//!
//! Sections are `[environment]`, `[run]`, and one `[algorithm.<label>]`
//! per policy; the label names the output files. Unknown sections or keys
//! are errors.

use std::collections::BTreeMap;

use thiserror::Error;

use crate::Scalar;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ConfigError {
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },

    #[error("section [{section}]: unknown key `{key}`")]
    UnknownKey { section: String, key: String },

    #[error("section [{section}]: missing key `{key}`")]
    MissingKey { section: String, key: String },

    #[error("section [{section}], key `{key}`: {message}")]
    BadValue {
        section: String,
        key: String,
        message: String,
    },

    #[error("{0}")]
    Invalid(String),
}

/// Which environment to build.
#[derive(Debug, Clone, PartialEq)]
pub enum EnvironmentSpec {
    PaperSis {
        seed: u64,
        sigma: Scalar,
        alpha: Option<Scalar>,
        infection_floor: Scalar,
        dt: Scalar,
        init_band: (Scalar, Scalar),
    },
    ScalarSis {
        beta: Scalar,
        gamma: Scalar,
        contact: Scalar,
        dt: Scalar,
    },
    Linear {
        z_star: Vec<Scalar>,
        contraction: Vec<Scalar>,
        x_star: Vec<Scalar>,
        sigma: Scalar,
        initial: Scalar,
    },
    DeskGame {
        players: usize,
        resources: usize,
        actions: usize,
        seed: u64,
        sigma: Scalar,
    },
    PaperGame {
        seed: u64,
        sigma: Scalar,
        actions: usize,
    },
    UcbBreaker,
    LowerBoundPair {
        delta: Scalar,
        tau_c: Scalar,
    },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum UecbModeSpec {
    Noiseless,
    Noisy,
}

/// One policy to run, with its output label.
#[derive(Debug, Clone, PartialEq)]
pub struct AlgorithmSpec {
    pub label: String,
    pub kind: AlgorithmKind,
}

#[derive(Debug, Clone, PartialEq)]
pub enum AlgorithmKind {
    Uecb {
        mode: UecbModeSpec,
        rho1: Scalar,
        rho2: Scalar,
        /// Override the environment-declared convergence time.
        tau_c: Option<Scalar>,
        /// Override the environment-declared Lipschitz constant.
        lipschitz: Option<Scalar>,
    },
    Ucb,
    Exp3 {
        learning_rate: Option<Scalar>,
    },
    Rexp3 {
        learning_rate: Option<Scalar>,
        window: Option<u64>,
    },
    Naive {
        t_try: u64,
    },
}

/// `[run]` section after defaults.
#[derive(Debug, Clone, PartialEq)]
pub struct RunSettings {
    pub horizon: u64,
    pub seeds: u64,
    pub master_seed: u64,
    pub out_dir: String,
    /// Trajectory subsampling on disk; `None` resolves to `max(1, T/2000)`.
    pub record_stride: Option<u64>,
    pub random_init: bool,
    pub workers: usize,
    pub eq_tol: Scalar,
}

impl RunSettings {
    pub fn stride(&self) -> u64 {
        self.record_stride
            .unwrap_or_else(|| (self.horizon / 2000).max(1))
    }
}

/// Fully parsed experiment description.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub environment: EnvironmentSpec,
    pub algorithms: Vec<AlgorithmSpec>,
    pub run: RunSettings,
}

/// One parsed `key = value` section with consumed-key tracking.
struct Section {
    name: String,
    entries: BTreeMap<String, String>,
}

impl Section {
    fn take(&mut self, key: &str) -> Option<String> {
        self.entries.remove(key)
    }

    fn require(&mut self, key: &str) -> Result<String, ConfigError> {
        self.take(key).ok_or_else(|| ConfigError::MissingKey {
            section: self.name.clone(),
            key: key.into(),
        })
    }

    fn finish(self) -> Result<(), ConfigError> {
        if let Some(key) = self.entries.into_keys().next() {
            return Err(ConfigError::UnknownKey {
                section: self.name,
                key,
            });
        }
        Ok(())
    }

    fn bad(&self, key: &str, message: impl Into<String>) -> ConfigError {
        ConfigError::BadValue {
            section: self.name.clone(),
            key: key.into(),
            message: message.into(),
        }
    }

    fn parse<T: std::str::FromStr>(&mut self, key: &str, default: T) -> Result<T, ConfigError> {
        match self.take(key) {
            None => Ok(default),
            Some(raw) => raw
                .parse()
                .map_err(|_| self.bad(key, format!("cannot parse `{raw}`"))),
        }
    }

    fn parse_required<T: std::str::FromStr>(&mut self, key: &str) -> Result<T, ConfigError> {
        let raw = self.require(key)?;
        raw.parse()
            .map_err(|_| self.bad(key, format!("cannot parse `{raw}`")))
    }

    fn parse_optional<T: std::str::FromStr>(&mut self, key: &str) -> Result<Option<T>, ConfigError> {
        match self.take(key) {
            None => Ok(None),
            Some(raw) => raw
                .parse()
                .map(Some)
                .map_err(|_| self.bad(key, format!("cannot parse `{raw}`"))),
        }
    }

    fn parse_list(&mut self, key: &str) -> Result<Vec<Scalar>, ConfigError> {
        let raw = self.require(key)?;
        raw.split(',')
            .map(|piece| {
                piece
                    .trim()
                    .parse::<Scalar>()
                    .map_err(|_| self.bad(key, format!("cannot parse `{piece}` as a number")))
            })
            .collect()
    }
}

fn split_sections(text: &str) -> Result<Vec<Section>, ConfigError> {
    let mut sections: Vec<Section> = Vec::new();
    for (idx, raw_line) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = match raw_line.find('#') {
            Some(pos) => &raw_line[..pos],
            None => raw_line,
        }
        .trim();
        if line.is_empty() {
            continue;
        }
        if let Some(name) = line.strip_prefix('[') {
            let name = name.strip_suffix(']').ok_or(ConfigError::Syntax {
                line: line_no,
                message: "unterminated section header".into(),
            })?;
            sections.push(Section {
                name: name.trim().to_string(),
                entries: BTreeMap::new(),
            });
            continue;
        }
        let (key, value) = line.split_once('=').ok_or(ConfigError::Syntax {
            line: line_no,
            message: format!("expected `key = value`, got `{line}`"),
        })?;
        let section = sections.last_mut().ok_or(ConfigError::Syntax {
            line: line_no,
            message: "key outside any section".into(),
        })?;
        let key = key.trim().to_string();
        if section.entries.contains_key(&key) {
            return Err(ConfigError::Syntax {
                line: line_no,
                message: format!("duplicate key `{key}`"),
            });
        }
        section.entries.insert(key, value.trim().to_string());
    }
    Ok(sections)
}

fn parse_environment(mut s: Section) -> Result<EnvironmentSpec, ConfigError> {
    let kind = s.require("kind")?;
    let spec = match kind.as_str() {
        "paper_sis" => EnvironmentSpec::PaperSis {
            seed: s.parse("seed", 0u64)?,
            sigma: s.parse("sigma", 0.0)?,
            alpha: s.parse_optional("alpha")?,
            infection_floor: s.parse("infection_floor", 0.1)?,
            dt: s.parse("dt", 0.1)?,
            init_band: (s.parse("init_lo", 0.1)?, s.parse("init_hi", 0.15)?),
        },
        "scalar_sis" => EnvironmentSpec::ScalarSis {
            beta: s.parse_required("beta")?,
            gamma: s.parse_required("gamma")?,
            contact: s.parse("contact", 1.0)?,
            dt: s.parse("dt", 0.1)?,
        },
        "linear" => {
            let z_star = s.parse_list("z_star")?;
            let contraction = s.parse_list("contraction")?;
            let x_star = s.parse_list("x_star")?;
            if z_star.len() != contraction.len() || z_star.len() != x_star.len() {
                return Err(s.bad("z_star", "arm lists must have equal length"));
            }
            EnvironmentSpec::Linear {
                z_star,
                contraction,
                x_star,
                sigma: s.parse("sigma", 0.0)?,
                initial: s.parse("initial", 0.0)?,
            }
        }
        "desk_game" => EnvironmentSpec::DeskGame {
            players: s.parse("players", 20usize)?,
            resources: s.parse("resources", 5usize)?,
            actions: s.parse("actions", 4usize)?,
            seed: s.parse("seed", 0u64)?,
            sigma: s.parse("sigma", 0.0)?,
        },
        "paper_game" => EnvironmentSpec::PaperGame {
            seed: s.parse("seed", 0u64)?,
            sigma: s.parse("sigma", 0.0)?,
            actions: s.parse("actions", 4usize)?,
        },
        "ucb_breaker" => EnvironmentSpec::UcbBreaker,
        "lower_bound_pair" => EnvironmentSpec::LowerBoundPair {
            delta: s.parse_required("delta")?,
            tau_c: s.parse_required("tau_c")?,
        },
        other => {
            return Err(s.bad("kind", format!("unknown environment `{other}`")));
        }
    };
    s.finish()?;
    Ok(spec)
}

fn parse_algorithm(mut s: Section, label: &str) -> Result<AlgorithmSpec, ConfigError> {
    if label.is_empty()
        || !label
            .chars()
            .all(|c| c.is_ascii_lowercase() || c.is_ascii_digit() || c == '_' || c == '-')
    {
        return Err(ConfigError::Invalid(format!(
            "algorithm label `{label}` must be lowercase [a-z0-9_-]"
        )));
    }
    let kind_name = s.take("kind").unwrap_or_else(|| label.to_string());
    let kind = match kind_name.as_str() {
        "uecb" => {
            let mode = match s.take("mode").as_deref() {
                None | Some("noisy") => UecbModeSpec::Noisy,
                Some("noiseless") => UecbModeSpec::Noiseless,
                Some(other) => {
                    return Err(s.bad("mode", format!("expected noisy|noiseless, got `{other}`")))
                }
            };
            AlgorithmKind::Uecb {
                mode,
                rho1: s.parse("rho1", std::f64::consts::LN_2)?,
                rho2: s.parse("rho2", 1.0)?,
                tau_c: s.parse_optional("tau_c")?,
                lipschitz: s.parse_optional("lipschitz")?,
            }
        }
        "ucb" => AlgorithmKind::Ucb,
        "exp3" => AlgorithmKind::Exp3 {
            learning_rate: s.parse_optional("learning_rate")?,
        },
        "rexp3" => AlgorithmKind::Rexp3 {
            learning_rate: s.parse_optional("learning_rate")?,
            window: s.parse_optional("window")?,
        },
        "naive" => AlgorithmKind::Naive {
            t_try: s.parse_required("t_try")?,
        },
        other => {
            return Err(ConfigError::Invalid(format!(
                "unknown algorithm kind `{other}` in [algorithm.{label}]"
            )));
        }
    };
    s.finish()?;
    Ok(AlgorithmSpec {
        label: label.to_string(),
        kind,
    })
}

fn parse_run(mut s: Section) -> Result<RunSettings, ConfigError> {
    let horizon = s.parse_required("horizon")?;
    let record_stride = match s.take("record_stride").as_deref() {
        None | Some("auto") => None,
        Some(raw) => Some(
            raw.parse::<u64>()
                .map_err(|_| s.bad("record_stride", format!("cannot parse `{raw}`")))
                .and_then(|v| {
                    if v == 0 {
                        Err(s.bad("record_stride", "must be >= 1"))
                    } else {
                        Ok(v)
                    }
                })?,
        ),
    };
    let workers = match s.take("workers").as_deref() {
        None => 1,
        Some("auto") => std::thread::available_parallelism()
            .map(|n| n.get())
            .unwrap_or(1),
        Some(raw) => raw
            .parse::<usize>()
            .map_err(|_| s.bad("workers", format!("cannot parse `{raw}`")))
            .and_then(|v| {
                if v == 0 {
                    Err(s.bad("workers", "must be >= 1"))
                } else {
                    Ok(v)
                }
            })?,
    };
    let settings = RunSettings {
        horizon,
        seeds: s.parse("seeds", 20u64)?,
        master_seed: s.parse("master_seed", 0u64)?,
        out_dir: s.take("out").unwrap_or_else(|| "out".into()),
        record_stride,
        random_init: s.parse("random_init", true)?,
        workers,
        eq_tol: s.parse("eq_tol", 1e-10)?,
    };
    if settings.horizon == 0 {
        return Err(ConfigError::Invalid("horizon must be >= 1".into()));
    }
    if settings.seeds == 0 {
        return Err(ConfigError::Invalid("seeds must be >= 1".into()));
    }
    if !(settings.eq_tol > 0.0) {
        return Err(ConfigError::Invalid("eq_tol must be > 0".into()));
    }
    s.finish()?;
    Ok(settings)
}

/// Parses a config file body.
pub fn parse_config(text: &str) -> Result<ExperimentConfig, ConfigError> {
    let mut environment = None;
    let mut run = None;
    let mut algorithms = Vec::new();
    for section in split_sections(text)? {
        match section.name.clone() {
            name if name == "environment" => {
                if environment.is_some() {
                    return Err(ConfigError::Invalid("duplicate [environment]".into()));
                }
                environment = Some(parse_environment(section)?);
            }
            name if name == "run" => {
                if run.is_some() {
                    return Err(ConfigError::Invalid("duplicate [run]".into()));
                }
                run = Some(parse_run(section)?);
            }
            name => match name.strip_prefix("algorithm.") {
                Some(label) => {
                    let label = label.to_string();
                    if algorithms
                        .iter()
                        .any(|a: &AlgorithmSpec| a.label == label)
                    {
                        return Err(ConfigError::Invalid(format!(
                            "duplicate [algorithm.{label}]"
                        )));
                    }
                    algorithms.push(parse_algorithm(section, &label)?);
                }
                None => {
                    return Err(ConfigError::Invalid(format!("unknown section [{name}]")));
                }
            },
        }
    }
    let environment =
        environment.ok_or_else(|| ConfigError::Invalid("missing [environment]".into()))?;
    let run = run.ok_or_else(|| ConfigError::Invalid("missing [run]".into()))?;
    Ok(ExperimentConfig {
        environment,
        algorithms,
        run,
    })
}
