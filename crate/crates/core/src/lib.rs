//! CMA-ES with signal-to-noise-ratio based learning-rate adaptation.
//!
//! The mean and covariance updates of a standard CMA-ES generation are scaled
//! by factors `η_m, η_Σ ∈ (0, 1]` that shrink when the update direction is
//! dominated by noise (multimodal landscapes, noisy objectives) and grow back
//! when it is informative. The crate also ships the benchmark functions, a
//! seeded trial harness and a small CLI (`lra-cmaes`) for suites and sweeps.
//!
//! ```no_run
//! use lra_cmaes::prelude::*;
//! use nalgebra::DVector;
//! use rand::SeedableRng;
//!
//! let mode = LearningRate::Adaptive(LraHyperParams::default());
//! let mut es = LraCmaEs::new(DVector::from_element(10, 3.0), 2.0, mode).unwrap();
//! let mut rng = ChaCha8Rng::seed_from_u64(1);
//! while es.distribution().mean.norm_squared() > 1e-8 {
//!     let xs = es.ask(&mut rng).to_vec();
//!     let f: Vec<f64> = xs.iter().map(|x| x.norm_squared()).collect();
//!     es.tell(&f).unwrap();
//! }
//! ```
//!
//! Randomness comes from `rand_chacha::ChaCha8Rng` (seeded with
//! `seed_from_u64`) and `rand_distr::StandardNormal` (ziggurat), so a seed
//! fully determines a trajectory.

pub mod cli;
pub mod cma;
pub mod config;
pub mod error;
pub mod harness;
pub mod linalg;
pub mod lra;
pub mod optimizer;
pub mod params;
pub mod problems;

pub use error::{Error, Result};

pub mod prelude {
    pub use crate::cma::{DistributionParams, PlainCmaEs};
    pub use crate::error::{Error, Result};
    pub use crate::harness::{run_trial, HistoryMode, OptimizerSpec, Termination, TrialConfig, TrialResult};
    pub use crate::lra::LraHyperParams;
    pub use crate::optimizer::{LearningRate, LraCmaEs, StepReport};
    pub use crate::params::StrategyParams;
    pub use crate::problems::{make_problem, Benchmark, Problem};
    pub use rand_chacha::ChaCha8Rng;
}
