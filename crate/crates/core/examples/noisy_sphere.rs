//! Noisy Sphere (noise variance 1): the learning rates decay as the signal in
//! the updates fades, letting the mean keep approaching the optimum.
//!
//! `cargo run --release --example noisy_sphere`

use lra_cmaes::prelude::*;

fn main() -> Result<()> {
    let problem = make_problem("sphere", 10, 1.0)?;
    for opt in [
        OptimizerSpec::Lra,
        OptimizerSpec::Fixed {
            eta_m: 1.0,
            eta_sigma: 1.0,
        },
    ] {
        let cfg = TrialConfig::new(problem.clone(), opt, 300_000, 1e-8, 11).with_history(HistoryMode::Every(1));
        let r = run_trial(&cfg);
        println!(
            "== {} ({}, best noiseless f(m) {:.3e})",
            opt.label(),
            r.termination.as_str(),
            r.best_noiseless_fm
        );
        let mut next = 1_000;
        for h in &r.history {
            if h.evals >= next {
                println!(
                    "  evals {:>7}  f(m) {:>10.3e}  eta_m {:>9.3e}  eta_Sigma {:>9.3e}",
                    h.evals, h.f_m, h.eta_m, h.eta_sigma
                );
                next *= 4;
            }
        }
    }
    Ok(())
}
