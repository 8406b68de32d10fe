//! Drive the optimizer by hand on a rotated, badly scaled quadratic.
//!
//! `cargo run --example ask_tell`

use lra_cmaes::prelude::*;
use nalgebra::{DMatrix, DVector};
use rand::SeedableRng;

fn main() -> Result<()> {
    let d = 6;
    // f(x) = xᵀ Qᵀ D Q x with condition number 1e4 and a fixed rotation
    let scales = DVector::from_fn(d, |i, _| 1e4f64.powf(i as f64 / (d - 1) as f64));
    let q = DMatrix::from_fn(d, d, |i, j| ((i * d + j) as f64 * 0.7).sin()).qr().q();
    let h = q.transpose() * DMatrix::from_diagonal(&scales) * &q;
    let f = |x: &DVector<f64>| x.dot(&(&h * x));

    let mut es = LraCmaEs::new(
        DVector::from_element(d, 1.0),
        0.5,
        LearningRate::Adaptive(LraHyperParams::default()),
    )?;
    let mut rng = ChaCha8Rng::seed_from_u64(7);

    loop {
        let fitness: Vec<f64> = es.ask(&mut rng).iter().map(f).collect();
        let report = es.tell(&fitness)?;
        let fm = f(es.mean());
        if report.t % 50 == 0 {
            println!(
                "gen {:4}  f(m) = {:10.3e}  sigma = {:9.3e}  eta_m = {:.3}  eta_Sigma = {:.3}",
                report.t, fm, report.sigma, report.eta_m, report.eta_sigma
            );
        }
        if fm < 1e-10 || es.evaluations() > 200_000 {
            println!("stopped after {} evaluations with f(m) = {fm:.3e}", es.evaluations());
            break;
        }
    }
    Ok(())
}
