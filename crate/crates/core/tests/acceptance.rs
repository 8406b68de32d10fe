//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any
//! criterion fails. All thresholds are pinned below.

use std::fs;
use std::path::Path;
use std::time::{Duration, Instant};

use lra_cmaes::harness::{SuiteOutput, SuiteSpec};
use lra_cmaes::lra::{estimate_signal, estimate_snr, update_snr_state, LraComponentState};
use lra_cmaes::prelude::*;
use nalgebra::DVector;
use rand::SeedableRng;
use rand_distr::{Distribution, StandardNormal};

const BASE_SEED: u64 = 20_241_016;
const FIXED_ONE: OptimizerSpec = OptimizerSpec::Fixed {
    eta_m: 1.0,
    eta_sigma: 1.0,
};

// pinned thresholds
const C1_MIN_RATE: f64 = 1.0;
const C1_MAX_SECS: f64 = 300.0;
const C2_MIN_RATE: f64 = 0.9;
const C2_MAX_SECS: f64 = 1800.0;
const C4_FACTOR: f64 = 10.0;
const C5_REL_TOL: f64 = 0.1;
const C5_MAX_SECS: f64 = 1.0;
const C6_REL_TOL: f64 = 0.1;
const C8_GENERATIONS: usize = 100;
const C9_FACTOR: f64 = 5.0;
const C9_EARLY_EVALS: u64 = 10_000;

struct Report {
    lines: Vec<(bool, String)>,
}

impl Report {
    fn record(&mut self, id: u32, pass: bool, text: String) {
        let line = format!("{} [{id:>2}] {text}", if pass { "PASS" } else { "FAIL" });
        println!("{line}");
        self.lines.push((pass, line));
    }
}

fn suite(
    problem: &str,
    noise: f64,
    optimizers: Vec<OptimizerSpec>,
    trials: usize,
    max_evals: u64,
    stride: u64,
) -> SuiteSpec {
    SuiteSpec {
        problems: vec![make_problem(problem, 10, noise).unwrap()],
        optimizers,
        trials,
        base_seed: BASE_SEED,
        max_evals,
        target: 1e-8,
        hyperparams: LraHyperParams::default(),
        history: HistoryMode::Every(stride),
        ecdf_targets: 30,
    }
}

fn timed(spec: &SuiteSpec) -> (SuiteOutput, Duration) {
    let start = Instant::now();
    let out = spec.run(0);
    (out, start.elapsed())
}

fn results_of(out: &SuiteOutput, group: usize) -> Vec<&TrialResult> {
    out.trials.iter().filter(|t| t.0 == group).map(|t| &t.3).collect()
}

fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

fn snapshot(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut files = Vec::new();
    let mut stack = vec![dir.to_path_buf()];
    while let Some(d) = stack.pop() {
        for entry in fs::read_dir(&d).unwrap() {
            let p = entry.unwrap().path();
            if p.is_dir() {
                stack.push(p);
            } else {
                files.push((
                    p.strip_prefix(dir).unwrap().display().to_string(),
                    fs::read(&p).unwrap(),
                ));
            }
        }
    }
    files.sort();
    files
}

fn gaussian_stream(rng: &mut ChaCha8Rng, mu: &DVector<f64>) -> DVector<f64> {
    DVector::from_fn(mu.len(), |i, _| {
        let z: f64 = StandardNormal.sample(rng);
        mu[i] + z
    })
}

fn main() {
    let mut report = Report { lines: Vec::new() };
    let tmp = tempfile::tempdir().expect("temporary directory");

    // 1: noiseless Sphere
    let c1_spec = suite("sphere", 0.0, vec![OptimizerSpec::Lra], 20, 1_000_000, 100);
    let (c1, c1_time) = timed(&c1_spec);
    let c1_rate = c1.groups[0].success_rate;
    report.record(
        1,
        c1_rate >= C1_MIN_RATE && c1_time.as_secs_f64() < C1_MAX_SECS,
        format!(
            "Sphere d=10 LRA, 20 seeds, budget 1e6: success rate {c1_rate:.2} (need >= {C1_MIN_RATE}), runtime {:.1}s (need < {C1_MAX_SECS}s)",
            c1_time.as_secs_f64()
        ),
    );

    // 2 and 3: noiseless Rastrigin, adaptive against fixed η = 1 on shared seeds
    let c2_spec = suite(
        "rastrigin",
        0.0,
        vec![OptimizerSpec::Lra, FIXED_ONE],
        20,
        10_000_000,
        1000,
    );
    let (c2, c2_time) = timed(&c2_spec);
    let (lra_rate, fixed_rate) = (c2.groups[0].success_rate, c2.groups[1].success_rate);
    report.record(
        2,
        lra_rate >= C2_MIN_RATE && c2_time.as_secs_f64() < C2_MAX_SECS,
        format!(
            "Rastrigin d=10 LRA, 20 seeds, budget 1e7: success rate {lra_rate:.2} (need >= {C2_MIN_RATE}), runtime {:.1}s for both optimizers (need < {C2_MAX_SECS}s)",
            c2_time.as_secs_f64()
        ),
    );
    report.record(
        3,
        fixed_rate < lra_rate,
        format!("Rastrigin d=10 fixed eta=1, same seeds: success rate {fixed_rate:.2} (need < {lra_rate:.2})"),
    );

    // 4 and 9: noisy Sphere
    let c4_spec = suite("sphere", 1.0, vec![OptimizerSpec::Lra, FIXED_ONE], 10, 1_000_000, 10);
    let (c4, _) = timed(&c4_spec);
    let lra_best = median(results_of(&c4, 0).iter().map(|r| r.best_noiseless_fm).collect());
    let fixed_best = median(results_of(&c4, 1).iter().map(|r| r.best_noiseless_fm).collect());
    report.record(
        4,
        lra_best * C4_FACTOR <= fixed_best,
        format!(
            "noisy Sphere d=10 (noise var 1), 10 seeds: median best f(m) LRA {lra_best:.3e} vs fixed eta=1 {fixed_best:.3e}, ratio {:.1} (need >= {C4_FACTOR})",
            fixed_best / lra_best
        ),
    );

    // 5: SNR and signal estimates on a synthetic stream
    let start = Instant::now();
    let d = 5;
    let beta = 0.1;
    let mu = DVector::from_fn(d, |i, _| if i == 0 { 1.0 } else { 0.0 });
    let mut rng = ChaCha8Rng::seed_from_u64(BASE_SEED);
    let mut state = LraComponentState::new(d);
    for _ in 0..(50.0 / beta) as usize {
        state = update_snr_state(&state, &gaussian_stream(&mut rng, &mu), beta);
    }
    let (mut snr_sum, mut signal_sum) = (0.0, 0.0);
    let steps = 10_000;
    for _ in 0..steps {
        state = update_snr_state(&state, &gaussian_stream(&mut rng, &mu), beta);
        snr_sum += estimate_snr(&state, beta).unwrap_or(f64::NAN);
        signal_sum += estimate_signal(&state, beta);
    }
    let c5_time = start.elapsed().as_secs_f64();
    let (snr, signal) = (snr_sum / steps as f64, signal_sum / steps as f64);
    let true_snr = mu.norm_squared() / d as f64;
    report.record(
        5,
        (snr / true_snr - 1.0).abs() <= C5_REL_TOL && (signal - 1.0).abs() <= C5_REL_TOL && c5_time < C5_MAX_SECS,
        format!(
            "SNR estimator on N(mu, I), d=5, beta=0.1: mean SNR {snr:.4} vs {true_snr} and mean signal {signal:.4} vs 1 (need within {:.0}%), runtime {c5_time:.2}s",
            100.0 * C5_REL_TOL
        ),
    );

    // 6: spread of the moving average across independent replicas
    let replicas: Vec<DVector<f64>> = (0..200u64)
        .map(|r| {
            let mut rng = ChaCha8Rng::seed_from_u64(BASE_SEED + 1 + r);
            let mut state = LraComponentState::new(d);
            for _ in 0..(50.0 / beta) as usize {
                state = update_snr_state(&state, &gaussian_stream(&mut rng, &mu), beta);
            }
            state.e
        })
        .collect();
    let n = replicas.len() as f64;
    let mean = replicas.iter().fold(DVector::zeros(d), |acc, e| acc + e) / n;
    let trace = replicas.iter().map(|e| (e - &mean).norm_squared()).sum::<f64>() / (n - 1.0);
    let expected = beta / (2.0 - beta) * d as f64;
    report.record(
        6,
        (trace / expected - 1.0).abs() <= C6_REL_TOL,
        format!(
            "covariance trace of E over 200 replicas {trace:.4} vs {expected:.4} (need within {:.0}%)",
            100.0 * C6_REL_TOL
        ),
    );

    // 7: structural invariants on every generation of criteria 1 to 4
    let mut checked = 0usize;
    let mut violations: Vec<String> = Vec::new();
    for out in [&c1, &c2, &c4] {
        for (g, k, _, r) in &out.trials {
            checked += 1;
            for v in &r.invariant_violations {
                violations.push(format!("{} trial {k}: {v}", out.groups[*g].label));
            }
        }
    }
    report.record(
        7,
        violations.is_empty(),
        format!(
            "invariants (eta in (0,1], det(C)=1, C SPD, damping bound) over {checked} trials: {} violations{}",
            violations.len(),
            violations.first().map(|v| format!(", first: {v}")).unwrap_or_default()
        ),
    );

    // 8: disabled learning-rate layer against plain CMA-ES
    let m0 = DVector::from_element(5, 3.0);
    let mut plain = PlainCmaEs::new(m0.clone(), 2.0, None).unwrap();
    let mut wrapped = LraCmaEs::new(m0, 2.0, LearningRate::Disabled).unwrap();
    let mut rng_a = ChaCha8Rng::seed_from_u64(BASE_SEED);
    let mut rng_b = ChaCha8Rng::seed_from_u64(BASE_SEED);
    let sphere = |x: &DVector<f64>, _: &mut ChaCha8Rng| x.norm_squared();
    let bits = |v: &[f64]| v.iter().map(|x| x.to_bits()).collect::<Vec<_>>();
    let mut identical = 0;
    for _ in 0..C8_GENERATIONS {
        plain.step(&mut rng_a, sphere).unwrap();
        wrapped.step(&mut rng_b, sphere).unwrap();
        let (a, b) = (&plain.params, wrapped.distribution());
        if bits(a.mean.as_slice()) != bits(b.mean.as_slice())
            || a.sigma.to_bits() != b.sigma.to_bits()
            || bits(a.cov.as_slice()) != bits(b.cov.as_slice())
        {
            break;
        }
        identical += 1;
    }
    report.record(
        8,
        identical == C8_GENERATIONS,
        format!("disabled LRA vs plain CMA-ES on Sphere d=5: {identical}/{C8_GENERATIONS} generations bitwise identical in (m, sigma, C)"),
    );

    // 9: decay of η_Σ on the noisy Sphere runs of criterion 4
    let ratios: Vec<f64> = results_of(&c4, 0)
        .iter()
        .map(|r| {
            let early = r
                .history
                .iter()
                .find(|h| h.evals >= C9_EARLY_EVALS)
                .map_or(f64::NAN, |h| h.eta_sigma);
            early / r.history.last().map_or(f64::NAN, |h| h.eta_sigma)
        })
        .collect();
    let c9_median = median(ratios.clone());
    let min_ratio = ratios.iter().copied().fold(f64::INFINITY, f64::min);
    report.record(
        9,
        c9_median >= C9_FACTOR,
        format!(
            "noisy Sphere d=10 LRA: eta_Sigma at 1e4 evals / final eta_Sigma, median over 10 seeds {c9_median:.2} (min {min_ratio:.2}; need median >= {C9_FACTOR})"
        ),
    );

    // 10: repeated runs give byte-identical CSVs
    let mut same = true;
    let mut compared = 0;
    for (name, spec, first) in [("c1", &c1_spec, &c1), ("c4", &c4_spec, &c4)] {
        let a = tmp.path().join(format!("{name}-a"));
        let b = tmp.path().join(format!("{name}-b"));
        first.write_to(&a).expect("write first run");
        spec.run(0).write_to(&b).expect("write repeat run");
        let (sa, sb) = (snapshot(&a), snapshot(&b));
        compared += sa.len();
        same &= sa == sb;
    }
    let a = tmp.path().join("c2-a");
    let b = tmp.path().join("c2-b");
    let mut c2_short = c2_spec.clone();
    c2_short.trials = 2;
    c2_short.run(0).write_to(&a).expect("write");
    c2_short.run(0).write_to(&b).expect("write");
    let (sa, sb) = (snapshot(&a), snapshot(&b));
    compared += sa.len();
    same &= sa == sb;
    report.record(
        10,
        same,
        format!("repeated runs of criteria 1, 2 (two seeds) and 4 with identical seeds: {compared} output files byte-identical: {same}"),
    );

    let failed = report.lines.iter().filter(|(p, _)| !p).count();
    println!("acceptance: {} passed, {failed} failed", report.lines.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
