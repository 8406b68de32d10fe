//! Rastrigin in 10-D: adaptive learning rates against fixed η = 1, which is
//! the plain CMA-ES update followed by the σ/C re-split.
//!
//! `cargo run --release --example rastrigin_compare -- [trials] [budget]`

use lra_cmaes::harness::{run_trials, sp1, success_rate, trial_seed};
use lra_cmaes::prelude::*;

fn main() -> Result<()> {
    let mut args = std::env::args().skip(1);
    let trials: usize = args.next().and_then(|s| s.parse().ok()).unwrap_or(5);
    let budget: u64 = args
        .next()
        .and_then(|s| s.parse::<f64>().ok())
        .map_or(2_000_000, |v| v as u64);

    let problem = make_problem("rastrigin", 10, 0.0)?;
    for opt in [
        OptimizerSpec::Lra,
        OptimizerSpec::Fixed {
            eta_m: 1.0,
            eta_sigma: 1.0,
        },
    ] {
        let configs: Vec<TrialConfig> = (0..trials)
            .map(|k| {
                let seed = trial_seed(2024, "rastrigin-d10", k);
                TrialConfig::new(problem.clone(), opt, budget, 1e-8, seed).with_history(HistoryMode::None)
            })
            .collect();
        let results = run_trials(&configs, 0);
        let best: Vec<String> = results.iter().map(|r| format!("{:.2e}", r.best_noiseless_fm)).collect();
        println!(
            "{:<12} success {:.2}  SP1 {:>10}  best f(m): {}",
            opt.label(),
            success_rate(&results)?,
            sp1(&results)?.map_or("-".into(), |v| format!("{v:.3e}")),
            best.join(" ")
        );
    }
    Ok(())
}
