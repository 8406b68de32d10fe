//! Benchmark objectives with their initial distributions and an optional
//! additive Gaussian noise term.

use std::f64::consts::{E, PI};
use std::fmt;
use std::str::FromStr;

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Half-width of the evaluation box used for Ackley.
pub const ACKLEY_BOUND: f64 = 32.768;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Benchmark {
    Sphere,
    Ellipsoid,
    Rosenbrock,
    Ackley,
    Schaffer,
    Rastrigin,
    Bohachevsky,
    Griewank,
}

impl Benchmark {
    pub const ALL: [Benchmark; 8] = [
        Benchmark::Sphere,
        Benchmark::Ellipsoid,
        Benchmark::Rosenbrock,
        Benchmark::Ackley,
        Benchmark::Schaffer,
        Benchmark::Rastrigin,
        Benchmark::Bohachevsky,
        Benchmark::Griewank,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Benchmark::Sphere => "sphere",
            Benchmark::Ellipsoid => "ellipsoid",
            Benchmark::Rosenbrock => "rosenbrock",
            Benchmark::Ackley => "ackley",
            Benchmark::Schaffer => "schaffer",
            Benchmark::Rastrigin => "rastrigin",
            Benchmark::Bohachevsky => "bohachevsky",
            Benchmark::Griewank => "griewank",
        }
    }

    /// Smallest dimension for which the function is defined.
    pub fn min_dim(self) -> usize {
        match self {
            Benchmark::Ellipsoid | Benchmark::Rosenbrock | Benchmark::Schaffer | Benchmark::Bohachevsky => 2,
            _ => 1,
        }
    }

    /// `(m⁰ coordinate, σ⁰)`.
    pub fn initial_distribution(self) -> (f64, f64) {
        match self {
            Benchmark::Sphere | Benchmark::Ellipsoid | Benchmark::Rastrigin => (3.0, 2.0),
            Benchmark::Rosenbrock => (0.0, 0.1),
            Benchmark::Ackley => (15.5, 14.5),
            Benchmark::Schaffer => (55.0, 45.0),
            Benchmark::Bohachevsky => (8.0, 7.0),
            Benchmark::Griewank => (305.0, 295.0),
        }
    }

    pub fn optimum(self, dim: usize) -> Vec<f64> {
        match self {
            Benchmark::Rosenbrock => vec![1.0; dim],
            _ => vec![0.0; dim],
        }
    }

    /// Evaluates the function; `x` must be nonempty.
    pub fn eval(self, x: &[f64]) -> f64 {
        let d = x.len();
        match self {
            Benchmark::Sphere => x.iter().map(|v| v * v).sum(),
            Benchmark::Ellipsoid => x
                .iter()
                .enumerate()
                .map(|(i, v)| {
                    let scaled = 1000f64.powf(i as f64 / (d - 1) as f64) * v;
                    scaled * scaled
                })
                .sum(),
            Benchmark::Rosenbrock => x
                .windows(2)
                .map(|w| 100.0 * (w[1] - w[0] * w[0]).powi(2) + (w[0] - 1.0).powi(2))
                .sum(),
            Benchmark::Ackley => {
                let n = d as f64;
                let sq = x.iter().map(|v| v * v).sum::<f64>() / n;
                let cos = x.iter().map(|v| (2.0 * PI * v).cos()).sum::<f64>() / n;
                20.0 - 20.0 * (-0.2 * sq.sqrt()).exp() + E - cos.exp()
            }
            Benchmark::Schaffer => x
                .windows(2)
                .map(|w| {
                    let s = w[0] * w[0] + w[1] * w[1];
                    s.powf(0.25) * ((50.0 * s.powf(0.1)).sin().powi(2) + 1.0)
                })
                .sum(),
            Benchmark::Rastrigin => {
                10.0 * d as f64 + x.iter().map(|v| v * v - 10.0 * (2.0 * PI * v).cos()).sum::<f64>()
            }
            Benchmark::Bohachevsky => x
                .windows(2)
                .map(|w| {
                    w[0] * w[0] + 2.0 * w[1] * w[1] - 0.3 * (3.0 * PI * w[0]).cos() - 0.4 * (4.0 * PI * w[1]).cos()
                        + 0.7
                })
                .sum(),
            Benchmark::Griewank => {
                let sum = x.iter().map(|v| v * v).sum::<f64>() / 4000.0;
                let prod: f64 = x
                    .iter()
                    .enumerate()
                    .map(|(i, v)| (v / ((i + 1) as f64).sqrt()).cos())
                    .product();
                sum - prod + 1.0
            }
        }
    }
}

impl fmt::Display for Benchmark {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Benchmark {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Benchmark::ALL
            .into_iter()
            .find(|b| b.name() == s.to_ascii_lowercase())
            .ok_or_else(|| {
                let names: Vec<_> = Benchmark::ALL.iter().map(|b| b.name()).collect();
                Error::InvalidArgument(format!("unknown problem '{s}', expected one of {}", names.join(", ")))
            })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Bounds {
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
}

impl Bounds {
    pub fn clip(&self, x: &[f64]) -> Vec<f64> {
        x.iter()
            .zip(self.lower.iter().zip(&self.upper))
            .map(|(v, (lo, hi))| v.clamp(*lo, *hi))
            .collect()
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        x.iter()
            .zip(self.lower.iter().zip(&self.upper))
            .all(|(v, (lo, hi))| (*lo..=*hi).contains(v))
    }
}

/// A benchmark instance: objective, dimension, noise level and start point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Problem {
    pub benchmark: Benchmark,
    pub dim: usize,
    /// `σ_n²`; zero means noiseless.
    pub noise_variance: f64,
    /// Evaluation-only box: candidates are clipped before evaluation.
    pub bounds: Option<Bounds>,
    pub optimum: Vec<f64>,
    pub init_mean: Vec<f64>,
    pub init_sigma: f64,
}

impl Problem {
    pub fn new(benchmark: Benchmark, dim: usize, noise_variance: f64) -> Result<Self> {
        if dim < benchmark.min_dim() {
            return Err(Error::InvalidArgument(format!(
                "{benchmark} needs dimension >= {}, got {dim}",
                benchmark.min_dim()
            )));
        }
        if !(noise_variance >= 0.0 && noise_variance.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "noise variance must be finite and nonnegative, got {noise_variance}"
            )));
        }
        let (m0, sigma0) = benchmark.initial_distribution();
        let bounds = (benchmark == Benchmark::Ackley).then(|| Bounds {
            lower: vec![-ACKLEY_BOUND; dim],
            upper: vec![ACKLEY_BOUND; dim],
        });
        Ok(Self {
            benchmark,
            dim,
            noise_variance,
            bounds,
            optimum: benchmark.optimum(dim),
            init_mean: vec![m0; dim],
            init_sigma: sigma0,
        })
    }

    pub fn name(&self) -> &'static str {
        self.benchmark.name()
    }

    /// Noiseless objective value, after clipping into the bounds if any.
    pub fn evaluate_noiseless(&self, x: &[f64]) -> Result<f64> {
        if x.len() != self.dim {
            return Err(Error::InvalidArgument(format!(
                "expected a point of dimension {}, got {}",
                self.dim,
                x.len()
            )));
        }
        Ok(match &self.bounds {
            Some(b) => self.benchmark.eval(&b.clip(x)),
            None => self.benchmark.eval(x),
        })
    }

    /// Noiseless value plus `σ_n·g`, `g ~ N(0, 1)` drawn from `rng`. No
    /// random number is consumed for a noiseless problem.
    pub fn evaluate_noisy<R: Rng + ?Sized>(&self, x: &[f64], rng: &mut R) -> Result<f64> {
        let f = self.evaluate_noiseless(x)?;
        if self.noise_variance == 0.0 {
            return Ok(f);
        }
        let g: f64 = rng.sample(StandardNormal);
        Ok(f + self.noise_variance.sqrt() * g)
    }
}

pub fn make_problem(name: &str, dim: usize, noise_variance: f64) -> Result<Problem> {
    Problem::new(name.parse()?, dim, noise_variance)
}
