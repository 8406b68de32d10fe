//! Seeded trials with stopping rules, invariant monitoring and history capture.
//!
//! Every trial owns one `ChaCha8Rng` seeded from [`TrialConfig::seed`]; the
//! same stream feeds candidate sampling and the noise draws, in evaluation
//! order.

mod metrics;
mod suite;

pub use metrics::{ecdf, first_hits, sp1, success_rate, EcdfCurve, EcdfSpec};
pub use suite::{
    run_trials, trial_seed, write_ecdf_csv, write_history_csv, GroupSummary, SuiteOutput, SuiteSpec, SUMMARY_HEADER,
};

use nalgebra::DVector;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lra::LraHyperParams;
use crate::optimizer::{LearningRate, LraCmaEs, StepReport};
use crate::problems::Problem;

/// `σ·√λ_max(C)` below this counts as a numerical breakdown.
pub const SIGMA_COLLAPSE: f64 = 1e-16;

/// Tolerance of the `det(C) = 1` check after each re-split.
pub const DET_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum OptimizerSpec {
    /// Adaptive learning rates.
    Lra,
    Fixed {
        eta_m: f64,
        eta_sigma: f64,
    },
    /// Plain CMA-ES without any learning-rate layer.
    Plain,
}

impl OptimizerSpec {
    pub fn learning_rate(&self, hyper: LraHyperParams) -> LearningRate {
        match *self {
            OptimizerSpec::Lra => LearningRate::Adaptive(hyper),
            OptimizerSpec::Fixed { eta_m, eta_sigma } => LearningRate::Fixed { eta_m, eta_sigma },
            OptimizerSpec::Plain => LearningRate::Disabled,
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            OptimizerSpec::Lra => "lra",
            OptimizerSpec::Fixed { .. } => "fixed",
            OptimizerSpec::Plain => "plain",
        }
    }

    /// Unique label, e.g. `lra` or `fixed-m0.1-s1`.
    pub fn label(&self) -> String {
        match self {
            OptimizerSpec::Fixed { eta_m, eta_sigma } => format!("fixed-m{eta_m}-s{eta_sigma}"),
            other => other.kind().to_string(),
        }
    }

    /// Fixed learning rates, if any.
    pub fn etas(&self) -> Option<(f64, f64)> {
        match *self {
            OptimizerSpec::Fixed { eta_m, eta_sigma } => Some((eta_m, eta_sigma)),
            OptimizerSpec::Plain => Some((1.0, 1.0)),
            OptimizerSpec::Lra => None,
        }
    }
}

/// Which generations are kept in [`TrialResult::history`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum HistoryMode {
    None,
    /// Every n-th generation, plus the first and the last.
    Every(u64),
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrialConfig {
    pub problem: Problem,
    pub optimizer: OptimizerSpec,
    pub max_evals: u64,
    pub target_f: f64,
    pub seed: u64,
    pub hyperparams: LraHyperParams,
    pub history: HistoryMode,
}

impl TrialConfig {
    /// Full history, default hyperparameters.
    pub fn new(problem: Problem, optimizer: OptimizerSpec, max_evals: u64, target_f: f64, seed: u64) -> Self {
        Self {
            problem,
            optimizer,
            max_evals,
            target_f,
            seed,
            hyperparams: LraHyperParams::default(),
            history: HistoryMode::Every(1),
        }
    }

    pub fn with_history(mut self, history: HistoryMode) -> Self {
        self.history = history;
        self
    }

    pub fn with_hyperparams(mut self, hyperparams: LraHyperParams) -> Self {
        self.hyperparams = hyperparams;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let lambda = crate::params::default_population_size(self.problem.dim) as u64;
        if self.max_evals < lambda {
            return Err(Error::InvalidArgument(format!(
                "max_evals {} is smaller than the population size {lambda}",
                self.max_evals
            )));
        }
        if self.target_f.is_nan() || self.target_f <= 0.0 {
            return Err(Error::InvalidArgument(format!(
                "target must be positive, got {}",
                self.target_f
            )));
        }
        if let HistoryMode::Every(0) = self.history {
            return Err(Error::InvalidArgument("history stride must be positive".into()));
        }
        self.optimizer.learning_rate(self.hyperparams).validate()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Termination {
    TargetHit,
    BudgetExhausted,
    NumericalError,
}

impl Termination {
    pub fn as_str(self) -> &'static str {
        match self {
            Termination::TargetHit => "target_hit",
            Termination::BudgetExhausted => "budget_exhausted",
            Termination::NumericalError => "numerical_error",
        }
    }
}

/// One generation as seen by the harness.
#[derive(Debug, Clone, PartialEq)]
pub struct HistoryRecord {
    pub t: u64,
    pub evals: u64,
    /// Noiseless `f(m)`.
    pub f_m: f64,
    pub sigma: f64,
    pub eta_m: f64,
    pub eta_sigma: f64,
    pub snr_m: Option<f64>,
    pub snr_sigma: Option<f64>,
    pub sigma_eig_min: f64,
    pub sigma_eig_max: f64,
    pub cov_det: f64,
    pub cov_eig_min: f64,
}

impl HistoryRecord {
    fn from_report(r: &StepReport, f_m: f64) -> Self {
        Self {
            t: r.t,
            evals: r.evaluations,
            f_m,
            sigma: r.sigma,
            eta_m: r.eta_m,
            eta_sigma: r.eta_sigma,
            snr_m: r.snr_m,
            snr_sigma: r.snr_sigma,
            sigma_eig_min: r.sigma_eig_min,
            sigma_eig_max: r.sigma_eig_max,
            cov_det: r.cov_det,
            cov_eig_min: r.cov_eig_min,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrialResult {
    pub seed: u64,
    pub success: bool,
    pub evals_to_target: Option<u64>,
    /// Evaluations consumed in total.
    pub evaluations: u64,
    pub termination: Termination,
    /// Machine-readable cause for a numerical stop.
    pub reason: Option<String>,
    pub history: Vec<HistoryRecord>,
    /// `(evals, best noiseless f(m) so far)` at every strict improvement,
    /// starting with the initial mean at 0 evaluations.
    pub best_so_far: Vec<(u64, f64)>,
    pub best_noiseless_fm: f64,
    /// Structural invariant violations observed on any generation.
    pub invariant_violations: Vec<String>,
    pub floor_activations: u64,
}

struct Monitor {
    violations: Vec<String>,
    check_det: bool,
    hyper: Option<LraHyperParams>,
}

impl Monitor {
    const MAX_MESSAGES: usize = 32;

    fn push(&mut self, msg: String) {
        if self.violations.len() < Self::MAX_MESSAGES {
            self.violations.push(msg);
        }
    }

    fn check(&mut self, r: &StepReport) {
        let t = r.t;
        for (name, eta) in [("eta_m", r.eta_m), ("eta_sigma", r.eta_sigma)] {
            if !(eta > 0.0 && eta <= 1.0) {
                self.push(format!("t={t}: {name}={eta} outside (0, 1]"));
            }
        }
        if r.cov_eig_min.is_nan() || r.cov_eig_min <= 0.0 {
            self.push(format!(
                "t={t}: C not positive definite (min eigenvalue {:e})",
                r.cov_eig_min
            ));
        }
        if self.check_det && ((r.cov_det - 1.0).abs() > DET_TOLERANCE || r.cov_det.is_nan()) {
            self.push(format!("t={t}: det(C)={} differs from 1", r.cov_det));
        }
        if let Some(hp) = self.hyper {
            for (name, prev, next, beta) in [
                ("eta_m", r.eta_m_prev, r.eta_m, hp.beta_m),
                ("eta_sigma", r.eta_sigma_prev, r.eta_sigma, hp.beta_sigma),
            ] {
                let bound = (hp.gamma * prev).min(beta);
                // compared as a ratio, exact up to the rounding of one product
                let ratio = next / prev;
                let slack = 4.0 * f64::EPSILON;
                if ratio > bound.exp() * (1.0 + slack) || ratio < (-bound).exp() * (1.0 - slack) {
                    let change = (next.ln() - prev.ln()).abs();
                    self.push(format!(
                        "t={t}: |d ln {name}|={change:e} exceeds damping bound {bound:e}"
                    ));
                }
            }
        }
    }
}

struct Recorder {
    mode: HistoryMode,
    records: Vec<HistoryRecord>,
    last: Option<HistoryRecord>,
}

impl Recorder {
    fn offer(&mut self, rec: HistoryRecord) {
        match self.mode {
            HistoryMode::None => {}
            HistoryMode::Every(n) => {
                if rec.t.is_multiple_of(n) {
                    self.records.push(rec);
                    self.last = None;
                } else {
                    self.last = Some(rec);
                }
            }
        }
    }

    fn finish(mut self) -> Vec<HistoryRecord> {
        if let Some(rec) = self.last.take() {
            self.records.push(rec);
        }
        self.records
    }
}

/// Persistent use of the eigenvalue floor: more than one activation and more
/// than 1% of the generations so far.
fn floor_is_persistent(activations: u64, t: u64) -> bool {
    activations > 1 && activations * 100 > t
}

/// Runs one trial to a target hit, budget exhaustion or numerical breakdown.
/// Success is judged on the noiseless `f(m)`, once per generation.
pub fn run_trial(cfg: &TrialConfig) -> TrialResult {
    run_trial_with(cfg, |_| {})
}

/// [`run_trial`] with a callback receiving every generation's record,
/// independent of the history stride.
pub fn run_trial_with<F: FnMut(&HistoryRecord)>(cfg: &TrialConfig, mut on_step: F) -> TrialResult {
    let problem = &cfg.problem;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mode = cfg.optimizer.learning_rate(cfg.hyperparams);

    let mut result = TrialResult {
        seed: cfg.seed,
        success: false,
        evals_to_target: None,
        evaluations: 0,
        termination: Termination::NumericalError,
        reason: None,
        history: Vec::new(),
        best_so_far: Vec::new(),
        best_noiseless_fm: f64::INFINITY,
        invariant_violations: Vec::new(),
        floor_activations: 0,
    };

    let mut es = match LraCmaEs::new(DVector::from_vec(problem.init_mean.clone()), problem.init_sigma, mode) {
        Ok(es) => es,
        Err(e) => {
            result.reason = Some(format!("{}: {e}", e.reason_code()));
            return result;
        }
    };

    let noiseless = |es: &LraCmaEs| problem.benchmark.eval(&clip(problem, es.mean().as_slice()));
    let f0 = noiseless(&es);
    result.best_so_far.push((0, f0));
    result.best_noiseless_fm = f0;

    let dec = es.cov_decomposition();
    let mut recorder = Recorder {
        mode: cfg.history,
        records: Vec::new(),
        last: None,
    };
    recorder.offer(HistoryRecord {
        t: 0,
        evals: 0,
        f_m: f0,
        sigma: es.sigma(),
        eta_m: es.eta_m(),
        eta_sigma: es.eta_sigma(),
        snr_m: None,
        snr_sigma: None,
        sigma_eig_min: es.sigma().powi(2) * dec.min_eigenvalue(),
        sigma_eig_max: es.sigma().powi(2) * dec.max_eigenvalue(),
        cov_det: dec.eigenvalues.iter().product(),
        cov_eig_min: dec.min_eigenvalue(),
    });
    let mut monitor = Monitor {
        violations: Vec::new(),
        check_det: !matches!(mode, LearningRate::Disabled),
        hyper: match mode {
            LearningRate::Adaptive(hp) => Some(hp),
            _ => None,
        },
    };

    let termination = if f0 <= cfg.target_f {
        result.evals_to_target = Some(0);
        Termination::TargetHit
    } else {
        loop {
            if es.evaluations() >= cfg.max_evals {
                break Termination::BudgetExhausted;
            }
            let xs = es.ask(&mut rng).to_vec();
            let fitness: Vec<f64> = xs
                .iter()
                .map(|x| problem.evaluate_noisy(x.as_slice(), &mut rng))
                .collect::<Result<_>>()
                .expect("candidate dimension matches the problem");
            let report = match es.tell(&fitness) {
                Ok(r) => r,
                Err(e) => {
                    result.reason = Some(format!("{}: {e}", e.reason_code()));
                    break Termination::NumericalError;
                }
            };
            let f_m = noiseless(&es);
            monitor.check(&report);
            let record = HistoryRecord::from_report(&report, f_m);
            on_step(&record);
            recorder.offer(record);
            if f_m < result.best_noiseless_fm {
                result.best_noiseless_fm = f_m;
                result.best_so_far.push((report.evaluations, f_m));
            }
            if f_m <= cfg.target_f {
                result.evals_to_target = Some(report.evaluations);
                break Termination::TargetHit;
            }
            if report.sigma * report.cov_eig_max.sqrt() < SIGMA_COLLAPSE {
                result.reason = Some("sigma_collapse".into());
                break Termination::NumericalError;
            }
            if floor_is_persistent(es.floor_activations(), report.t) {
                result.reason = Some("eigenvalue_floor".into());
                break Termination::NumericalError;
            }
        }
    };

    result.termination = termination;
    result.success = termination == Termination::TargetHit;
    result.evaluations = es.evaluations();
    result.history = recorder.finish();
    result.invariant_violations = monitor.violations;
    result.floor_activations = es.floor_activations();
    result
}

fn clip(problem: &Problem, x: &[f64]) -> Vec<f64> {
    match &problem.bounds {
        Some(b) => b.clip(x),
        None => x.to_vec(),
    }
}
