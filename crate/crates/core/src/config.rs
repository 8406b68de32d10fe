//! TOML configuration for suites and hyperparameter sweeps.
//!
//! ```toml
//! base_seed = 2024          # seeds are derived per (problem, optimizer, trial)
//! trials = 20
//! max_evals = 1e6           # integer or float notation
//! target = 1e-8
//! history_every = 0         # 0 disables per-trial history CSVs
//! ecdf_targets = 30
//!
//! [problems]
//! names = ["sphere", "rastrigin"]
//! dims = [10]
//! noise_variances = [0.0]
//!
//! [[optimizers]]
//! kind = "lra"
//!
//! [[optimizers]]
//! kind = "fixed"
//! eta_m = 1.0
//! eta_sigma = 1.0
//!
//! [hyperparams]             # optional, defaults α=1.4 β_m=0.1 β_Σ=0.03 γ=0.1
//! alpha = 1.4
//!
//! [sweep]                   # only read by the `sweep` subcommand
//! parameter = "alpha"       # alpha | beta_m | beta_sigma | gamma | eta_m | eta_sigma | eta
//! values = [0.5, 1.0, 1.4, 2.0]
//! ```
//!
//! Every key is checked: unknown keys, empty lists and out-of-domain values
//! are rejected with the offending field named.

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::Deserialize;
use thiserror::Error;

use crate::harness::{HistoryMode, OptimizerSpec, SuiteSpec};
use crate::lra::LraHyperParams;
use crate::problems::{Benchmark, Problem};

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    /// Syntax errors and unknown keys; the message carries line and column.
    #[error("{0}")]
    Parse(#[from] toml::de::Error),
    #[error("field `{field}`: {message}")]
    Field { field: String, message: String },
}

fn field_err(field: impl Into<String>, message: impl Into<String>) -> ConfigError {
    ConfigError::Field {
        field: field.into(),
        message: message.into(),
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemGrid {
    pub names: Vec<String>,
    pub dims: Vec<usize>,
    #[serde(default = "default_noise")]
    pub noise_variances: Vec<f64>,
}

fn default_noise() -> Vec<f64> {
    vec![0.0]
}

/// Swept hyperparameter.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepParameter {
    Alpha,
    BetaM,
    BetaSigma,
    Gamma,
    EtaM,
    EtaSigma,
    /// Sets `eta_m` and `eta_sigma` of every fixed optimizer together.
    Eta,
}

impl SweepParameter {
    pub fn as_str(self) -> &'static str {
        match self {
            SweepParameter::Alpha => "alpha",
            SweepParameter::BetaM => "beta_m",
            SweepParameter::BetaSigma => "beta_sigma",
            SweepParameter::Gamma => "gamma",
            SweepParameter::EtaM => "eta_m",
            SweepParameter::EtaSigma => "eta_sigma",
            SweepParameter::Eta => "eta",
        }
    }

    fn is_eta(self) -> bool {
        matches!(
            self,
            SweepParameter::EtaM | SweepParameter::EtaSigma | SweepParameter::Eta
        )
    }
}

impl fmt::Display for SweepParameter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for SweepParameter {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        SweepParameter::deserialize(serde::de::value::StrDeserializer::<serde::de::value::Error>::new(s))
            .map_err(|_| format!("unknown sweep parameter `{s}`"))
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    pub parameter: SweepParameter,
    pub values: Vec<f64>,
}

/// Parsed configuration file, before validation.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Config {
    #[serde(default)]
    pub base_seed: u64,
    #[serde(default = "default_trials")]
    pub trials: usize,
    #[serde(default = "default_max_evals")]
    pub max_evals: f64,
    #[serde(default = "default_target")]
    pub target: f64,
    #[serde(default)]
    pub history_every: u64,
    #[serde(default = "default_ecdf_targets")]
    pub ecdf_targets: usize,
    pub problems: ProblemGrid,
    #[serde(deserialize_with = "deserialize_optimizers")]
    pub optimizers: Vec<OptimizerSpec>,
    #[serde(default)]
    pub hyperparams: LraHyperParams,
    pub sweep: Option<SweepConfig>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct OptimizerEntry {
    kind: String,
    eta_m: Option<f64>,
    eta_sigma: Option<f64>,
}

fn deserialize_optimizers<'de, D>(deserializer: D) -> Result<Vec<OptimizerSpec>, D::Error>
where
    D: serde::Deserializer<'de>,
{
    use serde::de::Error as _;
    let entries = Vec::<OptimizerEntry>::deserialize(deserializer)?;
    entries
        .into_iter()
        .map(|e| match (e.kind.as_str(), e.eta_m, e.eta_sigma) {
            ("lra", None, None) => Ok(OptimizerSpec::Lra),
            ("plain", None, None) => Ok(OptimizerSpec::Plain),
            ("fixed", Some(eta_m), Some(eta_sigma)) => Ok(OptimizerSpec::Fixed { eta_m, eta_sigma }),
            ("fixed", _, _) => Err(D::Error::custom("kind `fixed` needs both `eta_m` and `eta_sigma`")),
            ("lra" | "plain", _, _) => Err(D::Error::custom(format!("kind `{}` takes no learning rates", e.kind))),
            (other, _, _) => Err(D::Error::custom(format!(
                "unknown optimizer kind `{other}`, expected lra, fixed or plain"
            ))),
        })
        .collect()
}

fn default_trials() -> usize {
    20
}
fn default_max_evals() -> f64 {
    1e6
}
fn default_target() -> f64 {
    1e-8
}
fn default_ecdf_targets() -> usize {
    30
}

/// Presets shipped with the crate, selectable by name.
pub const PRESETS: [(&str, &str); 4] = [
    (
        "benchmark-noiseless",
        include_str!("../presets/benchmark-noiseless.toml"),
    ),
    ("benchmark-noisy", include_str!("../presets/benchmark-noisy.toml")),
    ("alpha-sweep", include_str!("../presets/alpha-sweep.toml")),
    ("beta-sigma-sweep", include_str!("../presets/beta-sigma-sweep.toml")),
];

pub fn preset(name: &str) -> Option<&'static str> {
    PRESETS.iter().find(|(n, _)| *n == name).map(|(_, text)| *text)
}

/// Converts a budget written as float or integer to an evaluation count.
pub fn parse_budget(value: f64) -> Result<u64, String> {
    if !(value.is_finite() && value >= 1.0 && value.fract() == 0.0 && value <= u64::MAX as f64) {
        return Err(format!("expected a positive whole number, got {value}"));
    }
    Ok(value as u64)
}

impl Config {
    pub fn from_toml(text: &str) -> Result<Self, ConfigError> {
        let cfg: Config = toml::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_file(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::from_toml(&text)
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.trials == 0 {
            return Err(field_err("trials", "must be at least 1"));
        }
        parse_budget(self.max_evals).map_err(|m| field_err("max_evals", m))?;
        if !(self.target.is_finite() && self.target > 0.0) {
            return Err(field_err("target", "must be a positive number"));
        }
        if self.ecdf_targets == 0 {
            return Err(field_err("ecdf_targets", "must be at least 1"));
        }
        for (name, list_len) in [
            ("problems.names", self.problems.names.len()),
            ("problems.dims", self.problems.dims.len()),
            ("problems.noise_variances", self.problems.noise_variances.len()),
            ("optimizers", self.optimizers.len()),
        ] {
            if list_len == 0 {
                return Err(field_err(name, "must not be empty"));
            }
        }
        self.problems()?;
        self.hyperparams
            .validate()
            .map_err(|e| field_err("hyperparams", e.to_string()))?;
        for (i, opt) in self.optimizers.iter().enumerate() {
            opt.learning_rate(self.hyperparams)
                .validate()
                .map_err(|e| field_err(format!("optimizers[{i}]"), e.to_string()))?;
        }
        if let Some(sweep) = &self.sweep {
            if sweep.values.is_empty() {
                return Err(field_err("sweep.values", "must not be empty"));
            }
            if sweep.parameter.is_eta() && !self.optimizers.iter().any(|o| matches!(o, OptimizerSpec::Fixed { .. })) {
                return Err(field_err(
                    "sweep.parameter",
                    format!("`{}` needs a fixed optimizer", sweep.parameter),
                ));
            }
            for (i, &v) in sweep.values.iter().enumerate() {
                self.with_value(sweep.parameter, v)
                    .and_then(|c| c.validate_point())
                    .map_err(|e| match e {
                        ConfigError::Field { message, .. } => field_err(format!("sweep.values[{i}]"), message),
                        other => other,
                    })?;
            }
        }
        Ok(())
    }

    fn validate_point(&self) -> Result<(), ConfigError> {
        self.hyperparams
            .validate()
            .map_err(|e| field_err("hyperparams", e.to_string()))?;
        for opt in &self.optimizers {
            opt.learning_rate(self.hyperparams)
                .validate()
                .map_err(|e| field_err("optimizers", e.to_string()))?;
        }
        Ok(())
    }

    /// Cartesian product names × dims × noise variances.
    pub fn problems(&self) -> Result<Vec<Problem>, ConfigError> {
        let mut out = Vec::new();
        for (i, name) in self.problems.names.iter().enumerate() {
            let benchmark: Benchmark = name
                .parse()
                .map_err(|e: crate::Error| field_err(format!("problems.names[{i}]"), e.to_string()))?;
            for &dim in &self.problems.dims {
                for &noise in &self.problems.noise_variances {
                    out.push(Problem::new(benchmark, dim, noise).map_err(|e| field_err("problems", e.to_string()))?);
                }
            }
        }
        Ok(out)
    }

    /// Copy of this configuration with the swept parameter set to `value`.
    pub fn with_value(&self, parameter: SweepParameter, value: f64) -> Result<Config, ConfigError> {
        let mut cfg = self.clone();
        let hp = &mut cfg.hyperparams;
        match parameter {
            SweepParameter::Alpha => hp.alpha = value,
            SweepParameter::BetaM => hp.beta_m = value,
            SweepParameter::BetaSigma => hp.beta_sigma = value,
            SweepParameter::Gamma => hp.gamma = value,
            SweepParameter::EtaM | SweepParameter::EtaSigma | SweepParameter::Eta => {
                for opt in &mut cfg.optimizers {
                    if let OptimizerSpec::Fixed { eta_m, eta_sigma } = opt {
                        if parameter != SweepParameter::EtaSigma {
                            *eta_m = value;
                        }
                        if parameter != SweepParameter::EtaM {
                            *eta_sigma = value;
                        }
                    }
                }
            }
        }
        cfg.sweep = None;
        Ok(cfg)
    }

    pub fn suite_spec(&self) -> Result<SuiteSpec, ConfigError> {
        Ok(SuiteSpec {
            problems: self.problems()?,
            optimizers: self.optimizers.clone(),
            trials: self.trials,
            base_seed: self.base_seed,
            max_evals: parse_budget(self.max_evals).map_err(|m| field_err("max_evals", m))?,
            target: self.target,
            hyperparams: self.hyperparams,
            history: match self.history_every {
                0 => HistoryMode::None,
                n => HistoryMode::Every(n),
            },
            ecdf_targets: self.ecdf_targets,
        })
    }
}
