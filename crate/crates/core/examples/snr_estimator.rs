//! The moving-average SNR estimator on a synthetic stream Δ ~ N(μ, I) with
//! known SNR ‖μ‖²/d.
//!
//! `cargo run --release --example snr_estimator`

use lra_cmaes::lra::{estimate_signal, estimate_snr, update_snr_state, LraComponentState};
use nalgebra::DVector;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

fn main() {
    let d = 5;
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mu = DVector::from_fn(d, |i, _| if i == 0 { 1.0 } else { 0.0 });
    for beta in [0.3, 0.1, 0.03] {
        let mut state = LraComponentState::new(d);
        let (mut snr_sum, mut signal_sum, mut n) = (0.0, 0.0, 0);
        for step in 0..20_000 {
            let delta = DVector::from_fn(d, |i, _| {
                let z: f64 = StandardNormal.sample(&mut rng);
                mu[i] + z
            });
            state = update_snr_state(&state, &delta, beta);
            if step >= (50.0 / beta) as usize {
                snr_sum += estimate_snr(&state, beta).unwrap_or(f64::NAN);
                signal_sum += estimate_signal(&state, beta);
                n += 1;
            }
        }
        println!(
            "beta = {beta:<5} mean SNR estimate {:.4} (true {:.4}), mean signal estimate {:.4} (true 1)",
            snr_sum / n as f64,
            mu.norm_squared() / d as f64,
            signal_sum / n as f64
        );
    }
}
