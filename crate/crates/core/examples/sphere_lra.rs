//! One harness trial on the 10-D Sphere with the adaptive learning rates,
//! printing a thinned trace of the recorded history.
//!
//! `cargo run --release --example sphere_lra -- [seed]`

use lra_cmaes::prelude::*;

fn main() -> Result<()> {
    let seed = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(1);
    let problem = make_problem("sphere", 10, 0.0)?;
    let cfg = TrialConfig::new(problem, OptimizerSpec::Lra, 1_000_000, 1e-8, seed).with_history(HistoryMode::Every(50));
    let result = run_trial(&cfg);

    println!(
        "{:>6} {:>8} {:>12} {:>10} {:>8} {:>9}",
        "t", "evals", "f(m)", "sigma", "eta_m", "eta_Sigma"
    );
    for h in &result.history {
        println!(
            "{:>6} {:>8} {:>12.4e} {:>10.3e} {:>8.4} {:>9.4}",
            h.t, h.evals, h.f_m, h.sigma, h.eta_m, h.eta_sigma
        );
    }
    println!(
        "{} after {} evaluations (invariant violations: {})",
        result.termination.as_str(),
        result.evals_to_target.unwrap_or(result.evaluations),
        result.invariant_violations.len()
    );
    Ok(())
}
