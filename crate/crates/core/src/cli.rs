//! Command-line front end: `run`, `suite` and `sweep`.
//!
//! Exit codes: 0 when a single run hits its target (or a suite/sweep
//! completes), 1 when a run exhausts its budget, 2 for usage, configuration
//! and output-directory errors, 3 when a run stops on a numerical error.

use std::ffi::OsString;
use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::config::{self, Config, ConfigError, SweepParameter};
use crate::harness::{
    run_trial_with, write_history_csv, HistoryMode, HistoryRecord, OptimizerSpec, Termination, TrialConfig,
    SUMMARY_HEADER,
};
use crate::lra::LraHyperParams;
use crate::problems::{Benchmark, Problem};

pub const EXIT_TARGET: i32 = 0;
pub const EXIT_BUDGET: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_NUMERICAL: i32 = 3;

/// Environment variable holding the default output directory.
pub const OUT_ENV: &str = "LRA_CMAES_OUT";

#[derive(Debug, Parser)]
#[command(
    name = "lra-cmaes",
    version,
    about = "CMA-ES with SNR-based learning-rate adaptation"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run one seeded trial, streaming per-generation lines and writing its history CSV.
    Run(RunArgs),
    /// Run a problem × optimizer grid from a config file or preset.
    Suite(SuiteArgs),
    /// Run one suite per value of a hyperparameter and collect the summaries.
    Sweep(SweepArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum OptimizerKind {
    Lra,
    Fixed,
    Plain,
}

#[derive(Debug, Args)]
pub struct HyperArgs {
    #[arg(long)]
    pub alpha: Option<f64>,
    #[arg(long)]
    pub beta_m: Option<f64>,
    #[arg(long)]
    pub beta_sigma: Option<f64>,
    #[arg(long)]
    pub gamma: Option<f64>,
}

impl HyperArgs {
    fn apply(&self, mut hp: LraHyperParams) -> LraHyperParams {
        if let Some(v) = self.alpha {
            hp.alpha = v;
        }
        if let Some(v) = self.beta_m {
            hp.beta_m = v;
        }
        if let Some(v) = self.beta_sigma {
            hp.beta_sigma = v;
        }
        if let Some(v) = self.gamma {
            hp.gamma = v;
        }
        hp
    }
}

#[derive(Debug, Args)]
pub struct RunArgs {
    #[arg(long)]
    pub problem: Benchmark,
    #[arg(long, default_value_t = 10)]
    pub dim: usize,
    #[arg(long, value_enum, default_value_t = OptimizerKind::Lra)]
    pub optimizer: OptimizerKind,
    /// Mean learning rate of the fixed optimizer (default 1).
    #[arg(long)]
    pub eta_m: Option<f64>,
    /// Covariance learning rate of the fixed optimizer (default 1).
    #[arg(long)]
    pub eta_sigma: Option<f64>,
    #[command(flatten)]
    pub hyper: HyperArgs,
    /// Variance of the additive Gaussian noise.
    #[arg(long, default_value_t = 0.0)]
    pub noise_var: f64,
    /// Evaluation budget; float notation such as 1e7 is accepted.
    #[arg(long, default_value = "1e6", value_parser = budget_arg)]
    pub max_evals: u64,
    #[arg(long, default_value_t = 1e-8)]
    pub target: f64,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    #[arg(long, env = OUT_ENV, default_value = "lra-cmaes-out")]
    pub out: PathBuf,
    /// Print every n-th generation (0 prints only the final line).
    #[arg(long, default_value_t = 1)]
    pub log_every: u64,
    /// Keep every n-th generation in the history CSV.
    #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u64).range(1..))]
    pub history_every: u64,
}

#[derive(Debug, Args)]
#[group(id = "source", required = true, multiple = false)]
pub struct ConfigSource {
    /// TOML configuration file.
    #[arg(long, group = "source")]
    pub config: Option<PathBuf>,
    /// Built-in configuration: benchmark-noiseless, benchmark-noisy, alpha-sweep, beta-sigma-sweep.
    #[arg(long, group = "source")]
    pub preset: Option<String>,
}

#[derive(Debug, Args)]
pub struct SuiteArgs {
    #[command(flatten)]
    pub source: ConfigSource,
    #[arg(long)]
    pub trials: Option<usize>,
    #[arg(long, value_parser = budget_arg)]
    pub max_evals: Option<u64>,
    #[arg(long)]
    pub target: Option<f64>,
    /// Base seed from which per-trial seeds are derived.
    #[arg(long)]
    pub seed: Option<u64>,
    #[command(flatten)]
    pub hyper: HyperArgs,
    /// Worker threads (0 = one per core).
    #[arg(long, default_value_t = 0)]
    pub jobs: usize,
    #[arg(long, env = OUT_ENV, default_value = "lra-cmaes-out")]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[command(flatten)]
    pub suite: SuiteArgs,
    /// Swept hyperparameter, overriding the `[sweep]` section.
    #[arg(long, requires = "values")]
    pub parameter: Option<SweepParameter>,
    /// Comma-separated grid values, overriding the `[sweep]` section.
    #[arg(long, value_delimiter = ',', requires = "parameter")]
    pub values: Option<Vec<f64>>,
}

fn budget_arg(s: &str) -> Result<u64, String> {
    let v: f64 = s.trim().parse().map_err(|_| format!("`{s}` is not a number"))?;
    config::parse_budget(v)
}

#[derive(Debug)]
struct Usage(String);

impl From<ConfigError> for Usage {
    fn from(e: ConfigError) -> Self {
        Usage(e.to_string())
    }
}

impl From<crate::Error> for Usage {
    fn from(e: crate::Error) -> Self {
        Usage(e.to_string())
    }
}

fn io_usage(path: &Path) -> impl Fn(io::Error) -> Usage + '_ {
    move |e| Usage(format!("cannot write {}: {e}", path.display()))
}

/// Parses `args` (including the program name) and executes the command.
/// Returns the process exit code.
pub fn run_cli<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_TARGET };
        }
    };
    let outcome = match &cli.command {
        Command::Run(a) => cmd_run(a),
        Command::Suite(a) => cmd_suite(a),
        Command::Sweep(a) => cmd_sweep(a),
    };
    match outcome {
        Ok(code) => code,
        Err(Usage(msg)) => {
            eprintln!("error: {msg}");
            EXIT_USAGE
        }
    }
}

fn run_trial_config(a: &RunArgs) -> Result<TrialConfig, Usage> {
    let optimizer = match a.optimizer {
        OptimizerKind::Fixed => OptimizerSpec::Fixed {
            eta_m: a.eta_m.unwrap_or(1.0),
            eta_sigma: a.eta_sigma.unwrap_or(1.0),
        },
        kind => {
            if a.eta_m.is_some() || a.eta_sigma.is_some() {
                return Err(Usage("--eta-m and --eta-sigma apply to --optimizer fixed only".into()));
            }
            if kind == OptimizerKind::Lra {
                OptimizerSpec::Lra
            } else {
                OptimizerSpec::Plain
            }
        }
    };
    let problem = Problem::new(a.problem, a.dim, a.noise_var)?;
    let cfg = TrialConfig::new(problem, optimizer, a.max_evals, a.target, a.seed)
        .with_hyperparams(a.hyper.apply(LraHyperParams::default()))
        .with_history(HistoryMode::Every(a.history_every));
    cfg.validate()?;
    Ok(cfg)
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map_or_else(|| "-".to_string(), |x| format!("{x:.3e}"))
}

fn log_line(h: &HistoryRecord) -> String {
    format!(
        "t={} evals={} f(m)={:.6e} sigma={:.4e} eta_m={:.4e} eta_Sigma={:.4e} snr_m={} snr_Sigma={}",
        h.t,
        h.evals,
        h.f_m,
        h.sigma,
        h.eta_m,
        h.eta_sigma,
        fmt_opt(h.snr_m),
        fmt_opt(h.snr_sigma)
    )
}

fn cmd_run(a: &RunArgs) -> Result<i32, Usage> {
    let cfg = run_trial_config(a)?;
    fs::create_dir_all(&a.out).map_err(io_usage(&a.out))?;

    let stdout = io::stdout();
    let mut out = stdout.lock();
    let result = run_trial_with(&cfg, |h| {
        if a.log_every > 0 && h.t % a.log_every == 0 {
            let _ = writeln!(out, "{}", log_line(h));
        }
    });

    let name = format!(
        "history_{}-d{}_{}_seed{}.csv",
        cfg.problem.name(),
        cfg.problem.dim,
        cfg.optimizer.label(),
        cfg.seed
    );
    let path = a.out.join(name);
    write_history_csv(&path, &result.history).map_err(io_usage(&path))?;

    let _ = writeln!(
        out,
        "termination={} evals={} best_f_m={:e} history={}",
        result.termination.as_str(),
        result.evals_to_target.unwrap_or(result.evaluations),
        result.best_noiseless_fm,
        path.display()
    );
    if let Some(reason) = &result.reason {
        eprintln!("stopped: {reason}");
    }
    for v in &result.invariant_violations {
        eprintln!("invariant violation: {v}");
    }
    Ok(match result.termination {
        Termination::TargetHit => EXIT_TARGET,
        Termination::BudgetExhausted => EXIT_BUDGET,
        Termination::NumericalError => EXIT_NUMERICAL,
    })
}

fn load_config(a: &SuiteArgs) -> Result<Config, Usage> {
    let mut cfg = match (&a.source.config, &a.source.preset) {
        (Some(path), _) => Config::from_file(path).map_err(|e| Usage(format!("{}: {e}", path.display())))?,
        (None, Some(name)) => {
            let text = config::preset(name).ok_or_else(|| {
                let names: Vec<_> = config::PRESETS.iter().map(|(n, _)| *n).collect();
                Usage(format!("unknown preset `{name}`, expected one of {}", names.join(", ")))
            })?;
            Config::from_toml(text)?
        }
        (None, None) => return Err(Usage("either --config or --preset is required".into())),
    };
    if let Some(n) = a.trials {
        cfg.trials = n;
    }
    if let Some(n) = a.max_evals {
        cfg.max_evals = n as f64;
    }
    if let Some(t) = a.target {
        cfg.target = t;
    }
    if let Some(s) = a.seed {
        cfg.base_seed = s;
    }
    cfg.hyperparams = a.hyper.apply(cfg.hyperparams);
    cfg.validate()?;
    Ok(cfg)
}

fn print_summary(out: &crate::harness::SuiteOutput) {
    for g in &out.groups {
        println!(
            "{}: success {}/{} sp1={} median_best_f_m={:e}",
            g.label,
            g.successes,
            g.trials,
            g.sp1.map_or_else(|| "-".to_string(), |v| format!("{v:.4e}")),
            g.median_best_f_m
        );
    }
}

fn cmd_suite(a: &SuiteArgs) -> Result<i32, Usage> {
    let cfg = load_config(a)?;
    let spec = cfg.suite_spec()?;
    fs::create_dir_all(&a.out).map_err(io_usage(&a.out))?;
    let output = spec.run(a.jobs);
    output.write_to(&a.out).map_err(io_usage(&a.out))?;
    print_summary(&output);
    Ok(EXIT_TARGET)
}

fn cmd_sweep(a: &SweepArgs) -> Result<i32, Usage> {
    let mut cfg = load_config(&a.suite)?;
    if let (Some(parameter), Some(values)) = (a.parameter, &a.values) {
        cfg.sweep = Some(config::SweepConfig {
            parameter,
            values: values.clone(),
        });
        cfg.validate()?;
    }
    let sweep = cfg
        .sweep
        .clone()
        .ok_or_else(|| Usage("no sweep grid: add a [sweep] section or pass --parameter and --values".into()))?;

    let out_dir = &a.suite.out;
    fs::create_dir_all(out_dir).map_err(io_usage(out_dir))?;
    let mut rows: Vec<Vec<String>> = Vec::new();
    for &value in &sweep.values {
        let point = cfg.with_value(sweep.parameter, value)?;
        let spec = point.suite_spec()?;
        let dir = out_dir.join(format!("{}-{}", sweep.parameter, value));
        let output = spec.run(a.suite.jobs);
        output.write_to(&dir).map_err(io_usage(&dir))?;
        println!("[{} = {}]", sweep.parameter, value);
        print_summary(&output);
        for g in &output.groups {
            let mut row = vec![sweep.parameter.to_string(), value.to_string()];
            row.extend(g.summary_row());
            rows.push(row);
        }
    }

    let path = out_dir.join("sweep.csv");
    let write = || -> io::Result<()> {
        let mut w = csv::Writer::from_path(&path).map_err(io::Error::other)?;
        let mut header = vec!["parameter", "value"];
        header.extend(SUMMARY_HEADER);
        w.write_record(&header).map_err(io::Error::other)?;
        for row in &rows {
            w.write_record(row).map_err(io::Error::other)?;
        }
        w.flush()
    };
    write().map_err(io_usage(&path))?;
    Ok(EXIT_TARGET)
}
