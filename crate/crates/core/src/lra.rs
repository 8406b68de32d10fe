//! Learning-rate adaptation: each CMA update of the mean and of `Σ = σ²C`
//! is scaled by a factor `η ∈ (0, 1]` that is steered so the estimated
//! signal-to-noise ratio of the update stays near `α·η`.
//!
//! Per generation:
//!
//! 1. `Δ_m = m' − m`, `Δ_Σ = vec(Σ' − Σ)` from the plain CMA proposal.
//! 2. Map both into coordinates where the Fisher metric at the old `Σ` is
//!    the identity: `Δ̃_m = Σ^{-1/2} Δ_m`,
//!    `Δ̃_Σ = 2^{-1/2} vec(Σ^{-1/2} Δ_Σ Σ^{-1/2})`.
//! 3. Update the moving averages `E ← (1−β)E + βΔ̃`, `V ← (1−β)V + β‖Δ̃‖²`.
//! 4. `SNR ≈ (‖E‖² − β/(2−β)·V) / (V − ‖E‖²)`.
//! 5. `η ← min(1, η·exp(min(γη, β)·clamp(SNR/(αη) − 1, −1, 1)))`.
//! 6. `m ← m + η_m Δ_m`, `Σ ← Σ + η_Σ Δ_Σ`, then split `Σ` into
//!    `σ = det(Σ)^{1/(2d)}`, `C = Σ/σ²` and rescale `σ` by `η_m,old/η_m,new`.

use log::warn;
use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::cma::DistributionParams;
use crate::error::{Error, Result};
use crate::linalg::{symmetrize, SymmetricDecomposition};

/// Relative eigenvalue floor applied to `Σ` after blending.
pub const BLEND_EIGEN_FLOOR: f64 = 1e-20;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct LraHyperParams {
    /// Target SNR slope.
    pub alpha: f64,
    pub beta_m: f64,
    pub beta_sigma: f64,
    /// Damping slope.
    pub gamma: f64,
}

impl Default for LraHyperParams {
    fn default() -> Self {
        Self {
            alpha: 1.4,
            beta_m: 0.1,
            beta_sigma: 0.03,
            gamma: 0.1,
        }
    }
}

impl LraHyperParams {
    pub fn validate(&self) -> Result<()> {
        let in_unit = |b: f64| b > 0.0 && b < 1.0;
        if !(self.alpha > 0.0 && self.alpha.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "alpha must be positive, got {}",
                self.alpha
            )));
        }
        if !in_unit(self.beta_m) {
            return Err(Error::InvalidArgument(format!(
                "beta_m must lie in (0, 1), got {}",
                self.beta_m
            )));
        }
        if !in_unit(self.beta_sigma) {
            return Err(Error::InvalidArgument(format!(
                "beta_sigma must lie in (0, 1), got {}",
                self.beta_sigma
            )));
        }
        if !(self.gamma > 0.0 && self.gamma.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "gamma must be positive, got {}",
                self.gamma
            )));
        }
        Ok(())
    }
}

/// Learning-rate factor and moving averages of one component (mean or covariance).
#[derive(Debug, Clone, PartialEq)]
pub struct LraComponentState {
    pub eta: f64,
    /// Moving average of the local-coordinate deltas.
    pub e: DVector<f64>,
    /// Moving average of their squared norms.
    pub v: f64,
}

impl LraComponentState {
    pub fn new(len: usize) -> Self {
        Self {
            eta: 1.0,
            e: DVector::zeros(len),
            v: 0.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DeltaPair {
    pub delta_m: DVector<f64>,
    /// Column-major `vec(Σ' − Σ)`, length `d²`.
    pub delta_sigma: DVector<f64>,
}

impl DeltaPair {
    pub fn delta_sigma_matrix(&self) -> DMatrix<f64> {
        let d = self.delta_m.len();
        DMatrix::from_column_slice(d, d, self.delta_sigma.as_slice())
    }
}

pub fn compute_deltas(old: &DistributionParams, proposed: &DistributionParams) -> Result<DeltaPair> {
    if old.dim() != proposed.dim() {
        return Err(Error::InvalidArgument(format!(
            "dimension mismatch: {} vs {}",
            old.dim(),
            proposed.dim()
        )));
    }
    let delta = proposed.sigma_matrix() - old.sigma_matrix();
    Ok(DeltaPair {
        delta_m: &proposed.mean - &old.mean,
        delta_sigma: DVector::from_column_slice(delta.as_slice()),
    })
}

/// Local coordinates using a precomputed `Σ^{-1/2}`.
pub fn local_coordinates_with(dp: &DeltaPair, inv_sqrt: &DMatrix<f64>) -> (DVector<f64>, DVector<f64>) {
    let tilde_m = inv_sqrt * &dp.delta_m;
    let whitened = inv_sqrt * dp.delta_sigma_matrix() * inv_sqrt * std::f64::consts::FRAC_1_SQRT_2;
    (tilde_m, DVector::from_column_slice(whitened.as_slice()))
}

/// `(Δ̃_m, Δ̃_Σ)` with respect to the Fisher metric at `sigma_old`.
pub fn to_local_coordinates(dp: &DeltaPair, sigma_old: &DMatrix<f64>) -> Result<(DVector<f64>, DVector<f64>)> {
    let inv_sqrt = SymmetricDecomposition::new(sigma_old)?.inv_sqrt()?;
    Ok(local_coordinates_with(dp, &inv_sqrt))
}

pub fn update_snr_state(state: &LraComponentState, tilde: &DVector<f64>, beta: f64) -> LraComponentState {
    LraComponentState {
        eta: state.eta,
        e: &state.e * (1.0 - beta) + tilde * beta,
        v: (1.0 - beta) * state.v + beta * tilde.norm_squared(),
    }
}

/// Estimated SNR, or `None` when `V − ‖E‖²` is not positive.
pub fn estimate_snr(state: &LraComponentState, beta: f64) -> Option<f64> {
    let e_sq = state.e.norm_squared();
    let denom = state.v - e_sq;
    if denom.is_nan() || denom <= 0.0 {
        return None;
    }
    Some((e_sq - beta / (2.0 - beta) * state.v) / denom)
}

/// Bias-corrected estimate of `‖E[Δ̃]‖²` from the moving averages.
pub fn estimate_signal(state: &LraComponentState, beta: f64) -> f64 {
    (2.0 - beta) / (2.0 - 2.0 * beta) * state.e.norm_squared() - beta / (2.0 - 2.0 * beta) * state.v
}

/// One learning-rate update. A degenerate SNR (`None`) counts as a saturated
/// increase.
pub fn adapt_learning_rate(eta: f64, snr: Option<f64>, alpha: f64, gamma: f64, beta: f64) -> f64 {
    let ratio = match snr {
        Some(s) => (s / (alpha * eta) - 1.0).clamp(-1.0, 1.0),
        None => 1.0,
    };
    (eta * ((gamma * eta).min(beta) * ratio).exp()).min(1.0)
}

/// Result of blending old and proposed parameters.
#[derive(Debug, Clone)]
pub struct BlendedUpdate {
    pub mean: DVector<f64>,
    pub sigma_matrix: DMatrix<f64>,
    /// Eigendecomposition of `sigma_matrix`.
    pub decomposition: SymmetricDecomposition,
    /// Whether the eigenvalue floor had to be applied.
    pub floored: bool,
}

/// `m + η_m Δ_m` and `Σ + η_Σ Δ_Σ`, evaluated as convex combinations of the
/// old and proposed values so `η = 1` returns the proposal exactly.
pub fn apply_blended_update(
    old: &DistributionParams,
    proposed: &DistributionParams,
    eta_m: f64,
    eta_sigma: f64,
) -> Result<BlendedUpdate> {
    let mean = &old.mean * (1.0 - eta_m) + &proposed.mean * eta_m;
    let mut sigma_matrix = old.sigma_matrix() * (1.0 - eta_sigma) + proposed.sigma_matrix() * eta_sigma;
    symmetrize(&mut sigma_matrix);

    let mut decomposition = SymmetricDecomposition::new(&sigma_matrix)?;
    let max = decomposition.max_eigenvalue();
    if max.is_nan() || max <= 0.0 {
        return Err(Error::Numerical(format!(
            "blended covariance has max eigenvalue {max:e}"
        )));
    }
    let floor = BLEND_EIGEN_FLOOR * max;
    let floored = decomposition.min_eigenvalue() < floor;
    if floored {
        warn!(
            "blended covariance lost positive definiteness (min eigenvalue {:e}); flooring at {:e}",
            decomposition.min_eigenvalue(),
            floor
        );
        decomposition.eigenvalues.apply(|l| *l = l.max(floor));
        sigma_matrix = decomposition.map_eigenvalues(|l| l);
    }
    Ok(BlendedUpdate {
        mean,
        sigma_matrix,
        decomposition,
        floored,
    })
}

/// Splits `Σ` into `σ = det(Σ)^{1/(2d)}` and `C = Σ/σ²`.
pub fn decompose_sigma(sigma_matrix: &DMatrix<f64>) -> Result<(f64, DMatrix<f64>)> {
    let dec = SymmetricDecomposition::new(sigma_matrix)?;
    decompose_sigma_with(sigma_matrix, &dec)
}

pub fn decompose_sigma_with(sigma_matrix: &DMatrix<f64>, dec: &SymmetricDecomposition) -> Result<(f64, DMatrix<f64>)> {
    let d = dec.dim() as f64;
    let sigma = (dec.log_det()? / (2.0 * d)).exp();
    if !(sigma > 0.0 && sigma.is_finite()) {
        return Err(Error::Numerical(format!("step-size {sigma:e} from determinant split")));
    }
    Ok((sigma, sigma_matrix / (sigma * sigma)))
}

pub fn correct_step_size(sigma: f64, eta_m_old: f64, eta_m_new: f64) -> f64 {
    sigma * (eta_m_old / eta_m_new)
}
