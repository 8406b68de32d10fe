//! Dimension-derived CMA-ES constants.
//!
//! The defaults are the standard ones from Hansen's CMA-ES tutorial with
//! positive recombination weights only:
//!
//! | constant | value |
//! |---|---|
//! | `λ` | `4 + ⌊3 ln d⌋` |
//! | `μ` | `⌊λ/2⌋` |
//! | `w_i` | `∝ ln((λ+1)/2) − ln i`, normalized to sum 1 |
//! | `c_σ` | `(μ_w+2)/(d+μ_w+5)` |
//! | `d_σ` | `1 + 2·max(0, √((μ_w−1)/(d+1))−1) + c_σ` |
//! | `c_c` | `(4+μ_w/d)/(d+4+2μ_w/d)` |
//! | `c_1` | `2/((d+1.3)²+μ_w)` |
//! | `c_μ` | `min(1−c_1, 2(μ_w−2+1/μ_w)/((d+2)²+μ_w))` |
//! | `c_m` | `1` |

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StrategyParams {
    pub dim: usize,
    pub lambda: usize,
    pub mu: usize,
    pub weights: Vec<f64>,
    /// Variance-effective selection mass `1 / Σ w_i²`.
    pub mu_eff: f64,
    pub c_sigma: f64,
    pub c_c: f64,
    pub c_1: f64,
    pub c_mu: f64,
    pub c_m: f64,
    pub d_sigma: f64,
    /// Approximation of `E‖N(0, I)‖`.
    pub chi_d: f64,
}

/// Default population size `4 + ⌊3 ln d⌋`.
pub fn default_population_size(dim: usize) -> usize {
    4 + (3.0 * (dim as f64).ln()).floor() as usize
}

/// `√d (1 − 1/(4d) + 1/(21d²))`.
pub fn expected_normal_norm(dim: usize) -> f64 {
    let d = dim as f64;
    d.sqrt() * (1.0 - 1.0 / (4.0 * d) + 1.0 / (21.0 * d * d))
}

impl StrategyParams {
    /// Standard defaults for dimension `dim`; `lambda` overrides the default
    /// population size.
    pub fn new(dim: usize, lambda: Option<usize>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidArgument("dimension must be at least 1".into()));
        }
        let lambda = match lambda {
            Some(l) if l < 2 => {
                return Err(Error::InvalidArgument(format!(
                    "population size must be at least 2, got {l}"
                )))
            }
            Some(l) => l,
            None => default_population_size(dim),
        };
        let mu = lambda / 2;

        let raw: Vec<f64> = (1..=mu)
            .map(|i| ((lambda as f64 + 1.0) / 2.0).ln() - (i as f64).ln())
            .collect();
        let total: f64 = raw.iter().sum();
        let weights: Vec<f64> = raw.iter().map(|w| w / total).collect();
        let mu_eff = 1.0 / weights.iter().map(|w| w * w).sum::<f64>();

        let d = dim as f64;
        let c_sigma = (mu_eff + 2.0) / (d + mu_eff + 5.0);
        let d_sigma = 1.0 + 2.0 * (((mu_eff - 1.0) / (d + 1.0)).sqrt() - 1.0).max(0.0) + c_sigma;
        let c_c = (4.0 + mu_eff / d) / (d + 4.0 + 2.0 * mu_eff / d);
        let c_1 = 2.0 / ((d + 1.3).powi(2) + mu_eff);
        let c_mu = (1.0 - c_1).min(2.0 * (mu_eff - 2.0 + 1.0 / mu_eff) / ((d + 2.0).powi(2) + mu_eff));

        Ok(Self {
            dim,
            lambda,
            mu,
            weights,
            mu_eff,
            c_sigma,
            c_c,
            c_1,
            c_mu,
            c_m: 1.0,
            d_sigma,
            chi_d: expected_normal_norm(dim),
        })
    }
}

/// Free-function form of [`StrategyParams::new`].
pub fn default_strategy_params(dim: usize, lambda: Option<usize>) -> Result<StrategyParams> {
    StrategyParams::new(dim, lambda)
}
