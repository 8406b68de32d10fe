//! Grids of seeded trials, their aggregation and CSV output.
//!
//! Output layout under the chosen directory:
//!
//! ```text
//! trials.csv        problem,d,optimizer,eta_m,eta_Sigma,seed,success,evals,termination,noise_var,trial,best_f_m,reason
//! summary.csv       problem,d,noise_var,optimizer,eta_m,eta_Sigma,trials,successes,success_rate,sp1,median_best_f_m
//! summary.json      the same summary, machine-readable
//! ecdf/<group>.csv  evals,fraction
//! histories/<group>_trial<k>.csv   t,evals,f_m,sigma,eta_m,eta_Sigma,snr_m,snr_Sigma
//! ```
//!
//! `eta_m`/`eta_Sigma` are empty for the adaptive optimizer, `sp1` is empty
//! when no trial succeeded, `evals` is the evaluation count at the target hit
//! or the total spent otherwise.

use std::fs;
use std::io;
use std::path::Path;

use rayon::prelude::*;
use serde::Serialize;

use super::metrics::{ecdf, sp1, success_rate, EcdfCurve, EcdfSpec};
use super::{run_trial, HistoryMode, HistoryRecord, OptimizerSpec, TrialConfig, TrialResult};
use crate::lra::LraHyperParams;
use crate::problems::Problem;

/// Trial seed derived from the grid coordinates: FNV-1a (64 bit) over
/// `"{base_seed}/{problem}/{trial_index}"`, then the SplitMix64 finalizer.
/// The optimizer is not part of the key, so every optimizer in a suite sees
/// the same seeds on a given problem.
pub fn trial_seed(base_seed: u64, problem: &str, trial_index: usize) -> u64 {
    let key = format!("{base_seed}/{problem}/{trial_index}");
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in key.bytes() {
        h ^= u64::from(b);
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    h = (h ^ (h >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    h = (h ^ (h >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    h ^ (h >> 31)
}

/// Cartesian grid of problems × optimizers, each run for `trials` seeds.
#[derive(Debug, Clone, PartialEq)]
pub struct SuiteSpec {
    pub problems: Vec<Problem>,
    pub optimizers: Vec<OptimizerSpec>,
    pub trials: usize,
    pub base_seed: u64,
    pub max_evals: u64,
    pub target: f64,
    pub hyperparams: LraHyperParams,
    pub history: HistoryMode,
    pub ecdf_targets: usize,
}

fn problem_label(p: &Problem) -> String {
    format!("{}-d{}-noise{}", p.name(), p.dim, p.noise_variance)
}

fn group_label(p: &Problem, o: &OptimizerSpec) -> String {
    format!("{}_{}", problem_label(p), o.label())
}

impl SuiteSpec {
    /// All trial configurations, grouped by (problem, optimizer) in grid
    /// order.
    pub fn trial_configs(&self) -> Vec<TrialConfig> {
        let mut out = Vec::with_capacity(self.problems.len() * self.optimizers.len() * self.trials);
        for problem in &self.problems {
            for opt in &self.optimizers {
                for k in 0..self.trials {
                    let seed = trial_seed(self.base_seed, &problem_label(problem), k);
                    out.push(TrialConfig {
                        problem: problem.clone(),
                        optimizer: *opt,
                        max_evals: self.max_evals,
                        target_f: self.target,
                        seed,
                        hyperparams: self.hyperparams,
                        history: self.history,
                    });
                }
            }
        }
        out
    }

    pub fn run(&self, jobs: usize) -> SuiteOutput {
        let configs = self.trial_configs();
        let results = run_trials(&configs, jobs);
        let ecdf_spec = EcdfSpec {
            n_targets: self.ecdf_targets,
            n_trials: self.trials,
            max_evals: self.max_evals,
        };
        let mut groups = Vec::new();
        let mut rows = Vec::new();
        let chunks = configs
            .chunks(self.trials.max(1))
            .zip(results.chunks(self.trials.max(1)));
        for (cfgs, res) in chunks {
            let head = &cfgs[0];
            let traces: Vec<Vec<(u64, f64)>> = res.iter().map(|r| r.best_so_far.clone()).collect();
            let mut best: Vec<f64> = res.iter().map(|r| r.best_noiseless_fm).collect();
            best.sort_by(f64::total_cmp);
            groups.push(GroupSummary {
                label: group_label(&head.problem, &head.optimizer),
                problem: head.problem.name().to_string(),
                dim: head.problem.dim,
                noise_variance: head.problem.noise_variance,
                optimizer: head.optimizer.kind().to_string(),
                etas: head.optimizer.etas(),
                trials: res.len(),
                successes: res.iter().filter(|r| r.success).count(),
                success_rate: success_rate(res).unwrap_or(0.0),
                sp1: sp1(res).ok().flatten(),
                median_best_f_m: median(&best),
                ecdf: ecdf(&traces, &ecdf_spec),
            });
            for (k, (cfg, r)) in cfgs.iter().zip(res).enumerate() {
                rows.push((groups.len() - 1, k, cfg.clone(), r.clone()));
            }
        }
        SuiteOutput { groups, trials: rows }
    }
}

fn median(sorted: &[f64]) -> f64 {
    match sorted.len() {
        0 => f64::NAN,
        n if n % 2 == 1 => sorted[n / 2],
        n => 0.5 * (sorted[n / 2 - 1] + sorted[n / 2]),
    }
}

/// Runs trials on a pool of `jobs` workers (0 = one per core). Results come
/// back in input order.
pub fn run_trials(configs: &[TrialConfig], jobs: usize) -> Vec<TrialResult> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .expect("thread pool construction");
    pool.install(|| configs.par_iter().map(run_trial).collect())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GroupSummary {
    pub label: String,
    pub problem: String,
    pub dim: usize,
    pub noise_variance: f64,
    pub optimizer: String,
    pub etas: Option<(f64, f64)>,
    pub trials: usize,
    pub successes: usize,
    pub success_rate: f64,
    pub sp1: Option<f64>,
    pub median_best_f_m: f64,
    #[serde(skip)]
    pub ecdf: EcdfCurve,
}

#[derive(Debug, Clone)]
pub struct SuiteOutput {
    pub groups: Vec<GroupSummary>,
    /// `(group index, trial index, config, result)`.
    pub trials: Vec<(usize, usize, TrialConfig, TrialResult)>,
}

fn opt_cell(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

fn etas_cells(etas: Option<(f64, f64)>) -> [String; 2] {
    match etas {
        Some((m, s)) => [m.to_string(), s.to_string()],
        None => [String::new(), String::new()],
    }
}

fn csv_err(e: csv::Error) -> io::Error {
    io::Error::other(e)
}

pub const SUMMARY_HEADER: [&str; 11] = [
    "problem",
    "d",
    "noise_var",
    "optimizer",
    "eta_m",
    "eta_Sigma",
    "trials",
    "successes",
    "success_rate",
    "sp1",
    "median_best_f_m",
];

impl GroupSummary {
    pub fn summary_row(&self) -> Vec<String> {
        let [eta_m, eta_s] = etas_cells(self.etas);
        vec![
            self.problem.clone(),
            self.dim.to_string(),
            self.noise_variance.to_string(),
            self.optimizer.clone(),
            eta_m,
            eta_s,
            self.trials.to_string(),
            self.successes.to_string(),
            self.success_rate.to_string(),
            opt_cell(self.sp1),
            self.median_best_f_m.to_string(),
        ]
    }
}

pub fn write_history_csv(path: &Path, history: &[HistoryRecord]) -> io::Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(csv_err)?;
    w.write_record(["t", "evals", "f_m", "sigma", "eta_m", "eta_Sigma", "snr_m", "snr_Sigma"])
        .map_err(csv_err)?;
    for h in history {
        w.write_record([
            h.t.to_string(),
            h.evals.to_string(),
            h.f_m.to_string(),
            h.sigma.to_string(),
            h.eta_m.to_string(),
            h.eta_sigma.to_string(),
            opt_cell(h.snr_m),
            opt_cell(h.snr_sigma),
        ])
        .map_err(csv_err)?;
    }
    w.flush()
}

pub fn write_ecdf_csv(path: &Path, curve: &EcdfCurve) -> io::Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(csv_err)?;
    w.write_record(["evals", "fraction"]).map_err(csv_err)?;
    for (e, f) in &curve.points {
        w.write_record([e.to_string(), f.to_string()]).map_err(csv_err)?;
    }
    w.flush()
}

impl SuiteOutput {
    pub fn write_to(&self, dir: &Path) -> io::Result<()> {
        fs::create_dir_all(dir.join("ecdf"))?;

        let mut w = csv::Writer::from_path(dir.join("trials.csv")).map_err(csv_err)?;
        w.write_record([
            "problem",
            "d",
            "optimizer",
            "eta_m",
            "eta_Sigma",
            "seed",
            "success",
            "evals",
            "termination",
            "noise_var",
            "trial",
            "best_f_m",
            "reason",
        ])
        .map_err(csv_err)?;
        for (_, k, cfg, r) in &self.trials {
            let [eta_m, eta_s] = etas_cells(cfg.optimizer.etas());
            w.write_record([
                cfg.problem.name().to_string(),
                cfg.problem.dim.to_string(),
                cfg.optimizer.kind().to_string(),
                eta_m,
                eta_s,
                r.seed.to_string(),
                r.success.to_string(),
                r.evals_to_target.unwrap_or(r.evaluations).to_string(),
                r.termination.as_str().to_string(),
                cfg.problem.noise_variance.to_string(),
                k.to_string(),
                r.best_noiseless_fm.to_string(),
                r.reason.clone().unwrap_or_default(),
            ])
            .map_err(csv_err)?;
        }
        w.flush()?;

        let mut w = csv::Writer::from_path(dir.join("summary.csv")).map_err(csv_err)?;
        w.write_record(SUMMARY_HEADER).map_err(csv_err)?;
        for g in &self.groups {
            w.write_record(g.summary_row()).map_err(csv_err)?;
        }
        w.flush()?;

        let json = serde_json::to_string_pretty(&self.groups).map_err(io::Error::other)?;
        fs::write(dir.join("summary.json"), json + "\n")?;

        for g in &self.groups {
            write_ecdf_csv(&dir.join("ecdf").join(format!("{}.csv", g.label)), &g.ecdf)?;
        }

        let with_history: Vec<_> = self.trials.iter().filter(|t| !t.3.history.is_empty()).collect();
        if !with_history.is_empty() {
            fs::create_dir_all(dir.join("histories"))?;
            for (g, k, _, r) in with_history {
                let name = format!("{}_trial{k:03}.csv", self.groups[*g].label);
                write_history_csv(&dir.join("histories").join(name), &r.history)?;
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problems::make_problem;

    #[test]
    fn seeds_are_distinct_and_stable() {
        let a = trial_seed(1, "sphere-d10-noise0", 0);
        assert_eq!(a, trial_seed(1, "sphere-d10-noise0", 0));
        assert_ne!(a, trial_seed(1, "sphere-d10-noise0", 1));
        assert_ne!(a, trial_seed(2, "sphere-d10-noise0", 0));
        assert_ne!(a, trial_seed(1, "sphere-d10-noise1", 0));
        let seeds: std::collections::HashSet<u64> = (0..1000).map(|k| trial_seed(1, "sphere-d10-noise0", k)).collect();
        assert_eq!(seeds.len(), 1000);
    }

    #[test]
    fn optimizers_share_seeds() {
        let mut spec = tiny_suite(3);
        spec.optimizers.push(OptimizerSpec::Plain);
        let seeds: Vec<u64> = spec.trial_configs().iter().map(|c| c.seed).collect();
        assert_eq!(seeds[..3], seeds[3..]);
    }

    fn tiny_suite(trials: usize) -> SuiteSpec {
        SuiteSpec {
            problems: vec![make_problem("sphere", 3, 0.0).unwrap()],
            optimizers: vec![OptimizerSpec::Lra],
            trials,
            base_seed: 7,
            max_evals: 3000,
            target: 1e-8,
            hyperparams: LraHyperParams::default(),
            history: HistoryMode::None,
            ecdf_targets: 30,
        }
    }

    #[test]
    fn one_config_one_row() {
        let out = tiny_suite(1).run(1);
        assert_eq!(out.trials.len(), 1);
        assert_eq!(out.groups.len(), 1);
        assert_eq!(out.groups[0].trials, 1);
    }

    #[test]
    fn job_count_does_not_change_results() {
        let a = tiny_suite(4).run(1);
        let b = tiny_suite(4).run(3);
        let ra: Vec<_> = a.trials.iter().map(|t| t.3.clone()).collect();
        let rb: Vec<_> = b.trials.iter().map(|t| t.3.clone()).collect();
        assert_eq!(ra, rb);
        assert_eq!(a.groups, b.groups);
    }

    #[test]
    fn median_values() {
        assert_eq!(median(&[1.0, 2.0, 10.0]), 2.0);
        assert_eq!(median(&[1.0, 2.0, 3.0, 10.0]), 2.5);
        assert!(median(&[]).is_nan());
    }
}
