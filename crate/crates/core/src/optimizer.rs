//! Ask/tell optimizer combining the CMA generation with learning-rate
//! scaling of the mean and covariance updates.

use nalgebra::{DMatrix, DVector};
use rand::Rng;

use crate::cma::{
    cma_candidate_update, rank_and_recombine, sample_with_sqrt, update_paths, DistributionParams, EvaluatedPopulation,
    EvolutionPaths,
};
use crate::error::{Error, Result};
use crate::linalg::{SymmetricDecomposition, EIGEN_FLOOR};
use crate::lra::{
    adapt_learning_rate, apply_blended_update, compute_deltas, correct_step_size, decompose_sigma_with, estimate_snr,
    local_coordinates_with, update_snr_state, BlendedUpdate, LraComponentState, LraHyperParams,
};
use crate::params::StrategyParams;

/// How the learning-rate factors evolve.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum LearningRate {
    /// SNR-driven adaptation of both factors.
    Adaptive(LraHyperParams),
    /// Constant factors; the blended `Σ` is still re-split into `(σ, C)`.
    Fixed { eta_m: f64, eta_sigma: f64 },
    /// Both factors pinned to 1 with no re-split and no step-size correction:
    /// plain CMA-ES.
    Disabled,
}

impl LearningRate {
    pub fn validate(&self) -> Result<()> {
        match *self {
            LearningRate::Adaptive(hp) => hp.validate(),
            LearningRate::Fixed { eta_m, eta_sigma } => {
                for (name, eta) in [("eta_m", eta_m), ("eta_sigma", eta_sigma)] {
                    if !(eta > 0.0 && eta <= 1.0) {
                        return Err(Error::InvalidArgument(format!("{name} must lie in (0, 1], got {eta}")));
                    }
                }
                Ok(())
            }
            LearningRate::Disabled => Ok(()),
        }
    }
}

/// Per-generation record emitted by [`LraCmaEs::tell`].
#[derive(Debug, Clone, PartialEq)]
pub struct StepReport {
    /// Generation counter after the step.
    pub t: u64,
    pub evaluations: u64,
    pub sigma: f64,
    pub eta_m: f64,
    pub eta_sigma: f64,
    pub eta_m_prev: f64,
    pub eta_sigma_prev: f64,
    pub snr_m: Option<f64>,
    pub snr_sigma: Option<f64>,
    /// Eigenvalue extremes of `σ²C`.
    pub sigma_eig_min: f64,
    pub sigma_eig_max: f64,
    /// Eigenvalue extremes and determinant of `C`.
    pub cov_eig_min: f64,
    pub cov_eig_max: f64,
    pub cov_det: f64,
    pub h_sigma: bool,
    /// The blended `Σ` needed the eigenvalue floor this step.
    pub floored: bool,
}

#[derive(Debug, Clone)]
pub struct LraCmaEs {
    strategy: StrategyParams,
    dist: DistributionParams,
    paths: EvolutionPaths,
    mode: LearningRate,
    /// β values used by the SNR estimators (also in fixed modes, for logging).
    hyper: LraHyperParams,
    mean_state: LraComponentState,
    cov_state: LraComponentState,
    cov_decomposition: SymmetricDecomposition,
    pending: Option<EvaluatedPopulation>,
    evaluations: u64,
    floor_activations: u64,
}

impl LraCmaEs {
    /// Starts from `N(mean, sigma² I)` with the default population size.
    pub fn new(mean: DVector<f64>, sigma: f64, mode: LearningRate) -> Result<Self> {
        Self::with_population_size(mean, sigma, mode, None)
    }

    pub fn with_population_size(
        mean: DVector<f64>,
        sigma: f64,
        mode: LearningRate,
        lambda: Option<usize>,
    ) -> Result<Self> {
        mode.validate()?;
        let dist = DistributionParams::new(mean, sigma)?;
        let dim = dist.dim();
        let strategy = StrategyParams::new(dim, lambda)?;
        let (eta_m, eta_sigma) = match mode {
            LearningRate::Fixed { eta_m, eta_sigma } => (eta_m, eta_sigma),
            _ => (1.0, 1.0),
        };
        let hyper = match mode {
            LearningRate::Adaptive(hp) => hp,
            _ => LraHyperParams::default(),
        };
        let mut mean_state = LraComponentState::new(dim);
        mean_state.eta = eta_m;
        let mut cov_state = LraComponentState::new(dim * dim);
        cov_state.eta = eta_sigma;
        let cov_decomposition = SymmetricDecomposition::new(&dist.cov)?;
        Ok(Self {
            strategy,
            paths: EvolutionPaths::new(dim),
            dist,
            mode,
            hyper,
            mean_state,
            cov_state,
            cov_decomposition,
            pending: None,
            evaluations: 0,
            floor_activations: 0,
        })
    }

    pub fn strategy(&self) -> &StrategyParams {
        &self.strategy
    }

    pub fn distribution(&self) -> &DistributionParams {
        &self.dist
    }

    pub fn mean(&self) -> &DVector<f64> {
        &self.dist.mean
    }

    pub fn sigma(&self) -> f64 {
        self.dist.sigma
    }

    pub fn cov(&self) -> &DMatrix<f64> {
        &self.dist.cov
    }

    pub fn paths(&self) -> &EvolutionPaths {
        &self.paths
    }

    pub fn mode(&self) -> LearningRate {
        self.mode
    }

    pub fn eta_m(&self) -> f64 {
        self.mean_state.eta
    }

    pub fn eta_sigma(&self) -> f64 {
        self.cov_state.eta
    }

    pub fn mean_state(&self) -> &LraComponentState {
        &self.mean_state
    }

    pub fn cov_state(&self) -> &LraComponentState {
        &self.cov_state
    }

    pub fn generation(&self) -> u64 {
        self.paths.t
    }

    pub fn evaluations(&self) -> u64 {
        self.evaluations
    }

    pub fn floor_activations(&self) -> u64 {
        self.floor_activations
    }

    /// Eigendecomposition of the current `C`.
    pub fn cov_decomposition(&self) -> &SymmetricDecomposition {
        &self.cov_decomposition
    }

    /// Samples `λ` candidates. Calling `ask` again before `tell` discards the
    /// previous population.
    pub fn ask<R: Rng + ?Sized>(&mut self, rng: &mut R) -> &[DVector<f64>] {
        let sqrt = self.cov_decomposition.sqrt();
        let pop = sample_with_sqrt(&self.dist, &sqrt, self.strategy.lambda, rng);
        &self.pending.insert(pop).xs
    }

    /// Consumes the fitness of the last asked population and runs the rest of
    /// the generation.
    pub fn tell(&mut self, fitness: &[f64]) -> Result<StepReport> {
        let mut pop = self.pending.take().ok_or(Error::NoPendingPopulation)?;
        pop.set_fitness(fitness.to_vec())?;
        self.evaluations += pop.len() as u64;
        let sp = &self.strategy;

        let (dy, dz) = rank_and_recombine(&pop, sp)?;
        let (paths, h_sigma) = update_paths(&self.paths, &dy, &dz, sp);
        let proposed = cma_candidate_update(&self.dist, &paths, h_sigma, &dy, &pop, sp)?;

        // Σ_old^{-1/2} = C^{-1/2} / σ from the cached decomposition of C
        let sigma_old = self.dist.sigma;
        let min_sigma_eig = sigma_old * sigma_old * self.cov_decomposition.min_eigenvalue();
        if min_sigma_eig <= EIGEN_FLOOR {
            return Err(Error::SingularMetric {
                min_eigenvalue: min_sigma_eig,
            });
        }
        let inv_sqrt = self.cov_decomposition.map_eigenvalues(|l| 1.0 / (sigma_old * l.sqrt()));

        let deltas = compute_deltas(&self.dist, &proposed)?;
        let (tilde_m, tilde_sigma) = local_coordinates_with(&deltas, &inv_sqrt);

        let beta_m = self.hyper.beta_m;
        let beta_sigma = self.hyper.beta_sigma;
        let mut mean_state = update_snr_state(&self.mean_state, &tilde_m, beta_m);
        let mut cov_state = update_snr_state(&self.cov_state, &tilde_sigma, beta_sigma);
        let snr_m = estimate_snr(&mean_state, beta_m);
        let snr_sigma = estimate_snr(&cov_state, beta_sigma);

        let eta_m_prev = self.mean_state.eta;
        let eta_sigma_prev = self.cov_state.eta;
        if let LearningRate::Adaptive(hp) = self.mode {
            mean_state.eta = adapt_learning_rate(eta_m_prev, snr_m, hp.alpha, hp.gamma, beta_m);
            cov_state.eta = adapt_learning_rate(eta_sigma_prev, snr_sigma, hp.alpha, hp.gamma, beta_sigma);
        }

        let blended = apply_blended_update(&self.dist, &proposed, mean_state.eta, cov_state.eta)?;
        let (next, cov_decomposition) = match self.mode {
            LearningRate::Disabled => {
                let next = DistributionParams {
                    mean: blended.mean,
                    sigma: proposed.sigma,
                    cov: proposed.cov,
                };
                if !next.is_finite() {
                    return Err(Error::Numerical("non-finite distribution after update".into()));
                }
                let dec = SymmetricDecomposition::new(&next.cov)?;
                (next, dec)
            }
            _ => {
                if blended.floored {
                    self.floor_activations += 1;
                }
                let (sigma, cov) = decompose_sigma_with(&blended.sigma_matrix, &blended.decomposition)?;
                let next = DistributionParams {
                    mean: blended.mean,
                    sigma: correct_step_size(sigma, eta_m_prev, mean_state.eta),
                    cov,
                };
                if !next.is_finite() {
                    return Err(Error::Numerical("non-finite distribution after update".into()));
                }
                // C = Σ/σ² shares the eigenvectors of Σ
                let BlendedUpdate { decomposition, .. } = blended;
                let dec = SymmetricDecomposition {
                    eigenvalues: decomposition.eigenvalues / (sigma * sigma),
                    eigenvectors: decomposition.eigenvectors,
                };
                (next, dec)
            }
        };

        let sigma_sq = next.sigma * next.sigma;
        let report = StepReport {
            t: paths.t,
            evaluations: self.evaluations,
            sigma: next.sigma,
            eta_m: mean_state.eta,
            eta_sigma: cov_state.eta,
            eta_m_prev,
            eta_sigma_prev,
            snr_m,
            snr_sigma,
            sigma_eig_min: sigma_sq * cov_decomposition.min_eigenvalue(),
            sigma_eig_max: sigma_sq * cov_decomposition.max_eigenvalue(),
            cov_eig_min: cov_decomposition.min_eigenvalue(),
            cov_eig_max: cov_decomposition.max_eigenvalue(),
            cov_det: cov_decomposition.eigenvalues.iter().product(),
            h_sigma,
            floored: blended.floored,
        };

        self.dist = next;
        self.paths = paths;
        self.mean_state = mean_state;
        self.cov_state = cov_state;
        self.cov_decomposition = cov_decomposition;
        Ok(report)
    }

    /// `ask`, evaluate each candidate in order with `f`, then `tell`.
    pub fn step<R, F>(&mut self, rng: &mut R, mut f: F) -> Result<StepReport>
    where
        R: Rng + ?Sized,
        F: FnMut(&DVector<f64>, &mut R) -> f64,
    {
        let xs = self.ask(rng).to_vec();
        let fitness: Vec<f64> = xs.iter().map(|x| f(x, rng)).collect();
        self.tell(&fitness)
    }
}
