//! With the learning-rate layer disabled the optimizer follows the plain
//! CMA-ES trajectory exactly.
//!
//! `cargo run --example plain_reduction`

use lra_cmaes::prelude::*;
use nalgebra::DVector;
use rand::SeedableRng;

fn main() -> Result<()> {
    let m0 = DVector::from_element(5, 3.0);
    let sphere = |x: &DVector<f64>, _: &mut ChaCha8Rng| x.norm_squared();

    let mut plain = PlainCmaEs::new(m0.clone(), 2.0, None)?;
    let mut wrapped = LraCmaEs::new(m0, 2.0, LearningRate::Disabled)?;
    let (mut rng_a, mut rng_b) = (ChaCha8Rng::seed_from_u64(5), ChaCha8Rng::seed_from_u64(5));

    for gen in 1..=100 {
        plain.step(&mut rng_a, sphere)?;
        wrapped.step(&mut rng_b, sphere)?;
        let same = plain.params == *wrapped.distribution();
        if gen % 20 == 0 || !same {
            println!("gen {gen:3}: sigma {:.6e}  identical state: {same}", plain.params.sigma);
        }
        if !same {
            break;
        }
    }
    Ok(())
}
