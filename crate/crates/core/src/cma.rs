//! The unmodified CMA-ES generation: sampling, ranking and recombination,
//! evolution-path update and the candidate update of `(m, σ, C)`.
//!
//! [`cma_candidate_update`] never overwrites the current distribution; it
//! returns the proposal that the learning-rate layer blends with the old
//! parameters.

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::linalg::{symmetrize, SymmetricDecomposition};
use crate::params::StrategyParams;

/// The search distribution `N(m, σ²C)`.
#[derive(Debug, Clone, PartialEq)]
pub struct DistributionParams {
    pub mean: DVector<f64>,
    pub sigma: f64,
    pub cov: DMatrix<f64>,
}

impl DistributionParams {
    /// `C = I`.
    pub fn new(mean: DVector<f64>, sigma: f64) -> Result<Self> {
        if mean.is_empty() {
            return Err(Error::InvalidArgument("mean must not be empty".into()));
        }
        if !(sigma > 0.0 && sigma.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "step-size must be positive, got {sigma}"
            )));
        }
        if mean.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument("mean must be finite".into()));
        }
        let dim = mean.len();
        Ok(Self {
            mean,
            sigma,
            cov: DMatrix::identity(dim, dim),
        })
    }

    pub fn dim(&self) -> usize {
        self.mean.len()
    }

    /// `Σ = σ²C`.
    pub fn sigma_matrix(&self) -> DMatrix<f64> {
        &self.cov * (self.sigma * self.sigma)
    }

    pub fn is_finite(&self) -> bool {
        self.sigma.is_finite() && self.mean.iter().all(|v| v.is_finite()) && self.cov.iter().all(|v| v.is_finite())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvolutionPaths {
    pub p_sigma: DVector<f64>,
    pub p_c: DVector<f64>,
    /// Number of completed path updates.
    pub t: u64,
}

impl EvolutionPaths {
    pub fn new(dim: usize) -> Self {
        Self {
            p_sigma: DVector::zeros(dim),
            p_c: DVector::zeros(dim),
            t: 0,
        }
    }
}

/// One generation of samples `x_i = m + σ y_i`, `y_i = √C z_i`.
#[derive(Debug, Clone)]
pub struct EvaluatedPopulation {
    pub xs: Vec<DVector<f64>>,
    pub ys: Vec<DVector<f64>>,
    pub zs: Vec<DVector<f64>>,
    pub fitness: Option<Vec<f64>>,
    /// Sample indices sorted by ascending fitness, ties by index.
    pub ranking: Vec<usize>,
}

impl EvaluatedPopulation {
    pub fn len(&self) -> usize {
        self.xs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.xs.is_empty()
    }

    /// Stores fitness values and computes the ranking.
    pub fn set_fitness(&mut self, fitness: Vec<f64>) -> Result<()> {
        if fitness.len() != self.xs.len() {
            return Err(Error::InvalidArgument(format!(
                "expected {} fitness values, got {}",
                self.xs.len(),
                fitness.len()
            )));
        }
        if let Some((index, &value)) = fitness.iter().enumerate().find(|(_, f)| !f.is_finite()) {
            return Err(Error::InvalidFitness { index, value });
        }
        let mut ranking: Vec<usize> = (0..fitness.len()).collect();
        ranking.sort_by(|&a, &b| fitness[a].total_cmp(&fitness[b]).then(a.cmp(&b)));
        self.ranking = ranking;
        self.fitness = Some(fitness);
        Ok(())
    }
}

/// Builds a population from explicit standard-normal vectors.
pub fn population_from_normals(
    params: &DistributionParams,
    sqrt_cov: &DMatrix<f64>,
    zs: Vec<DVector<f64>>,
) -> EvaluatedPopulation {
    let ys: Vec<DVector<f64>> = zs.iter().map(|z| sqrt_cov * z).collect();
    let xs = ys.iter().map(|y| &params.mean + y * params.sigma).collect();
    EvaluatedPopulation {
        xs,
        ys,
        zs,
        fitness: None,
        ranking: Vec::new(),
    }
}

/// Draws `lambda` samples using a precomputed `√C`. The normals are drawn
/// sample by sample, coordinate by coordinate.
pub fn sample_with_sqrt<R: Rng + ?Sized>(
    params: &DistributionParams,
    sqrt_cov: &DMatrix<f64>,
    lambda: usize,
    rng: &mut R,
) -> EvaluatedPopulation {
    let dim = params.dim();
    let zs = (0..lambda)
        .map(|_| DVector::from_fn(dim, |_, _| rng.sample::<f64, _>(StandardNormal)))
        .collect();
    population_from_normals(params, sqrt_cov, zs)
}

pub fn sample_population<R: Rng + ?Sized>(
    params: &DistributionParams,
    sp: &StrategyParams,
    rng: &mut R,
) -> Result<EvaluatedPopulation> {
    let dec = SymmetricDecomposition::new(&params.cov)?;
    Ok(sample_with_sqrt(params, &dec.sqrt(), sp.lambda, rng))
}

/// Weighted recombination of the best `μ` steps: `(dy, dz)`.
pub fn rank_and_recombine(pop: &EvaluatedPopulation, sp: &StrategyParams) -> Result<(DVector<f64>, DVector<f64>)> {
    if pop.fitness.is_none() || pop.ranking.len() != pop.len() {
        return Err(Error::InvalidArgument("population has no fitness values".into()));
    }
    if pop.len() < sp.mu {
        return Err(Error::InvalidArgument(format!(
            "population of {} is smaller than mu = {}",
            pop.len(),
            sp.mu
        )));
    }
    let dim = pop.xs[0].len();
    let mut dy = DVector::zeros(dim);
    let mut dz = DVector::zeros(dim);
    for (w, &idx) in sp.weights.iter().zip(&pop.ranking) {
        dy.axpy(*w, &pop.ys[idx], 1.0);
        dz.axpy(*w, &pop.zs[idx], 1.0);
    }
    Ok((dy, dz))
}

/// Returns the updated paths and the Heaviside indicator `h_σ`.
pub fn update_paths(
    paths: &EvolutionPaths,
    dy: &DVector<f64>,
    dz: &DVector<f64>,
    sp: &StrategyParams,
) -> (EvolutionPaths, bool) {
    let d = sp.dim as f64;
    let t = paths.t + 1;

    let p_sigma = &paths.p_sigma * (1.0 - sp.c_sigma) + dz * (sp.c_sigma * (2.0 - sp.c_sigma) * sp.mu_eff).sqrt();

    let norm_sq = p_sigma.norm_squared();
    let correction = 1.0 - (1.0 - sp.c_sigma).powf(2.0 * t as f64);
    let h_sigma = norm_sq / correction < (2.0 + 4.0 / (d + 1.0)) * d;

    let mut p_c = &paths.p_c * (1.0 - sp.c_c);
    if h_sigma {
        p_c += dy * (sp.c_c * (2.0 - sp.c_c) * sp.mu_eff).sqrt();
    }

    (EvolutionPaths { p_sigma, p_c, t }, h_sigma)
}

/// Proposed `(m', σ', C')` from one generation. `paths` must already be the
/// updated paths of this generation.
pub fn cma_candidate_update(
    params: &DistributionParams,
    paths: &EvolutionPaths,
    h_sigma: bool,
    dy: &DVector<f64>,
    pop: &EvaluatedPopulation,
    sp: &StrategyParams,
) -> Result<DistributionParams> {
    let mean = &params.mean + dy * (sp.c_m * params.sigma);

    let sigma_arg = (sp.c_sigma / sp.d_sigma) * (paths.p_sigma.norm() / sp.chi_d - 1.0);
    let sigma = params.sigma * sigma_arg.min(1.0).exp();

    let stall = if h_sigma { 0.0 } else { sp.c_1 * sp.c_c * (2.0 - sp.c_c) };
    let weight_sum: f64 = sp.weights.iter().sum();
    let mut cov = &params.cov * (1.0 + stall - sp.c_1 - sp.c_mu * weight_sum);
    cov.ger(sp.c_1, &paths.p_c, &paths.p_c, 1.0);
    for (w, &idx) in sp.weights.iter().zip(&pop.ranking) {
        let y = &pop.ys[idx];
        cov.ger(sp.c_mu * w, y, y, 1.0);
    }
    symmetrize(&mut cov);

    let proposed = DistributionParams { mean, sigma, cov };
    if !proposed.is_finite() {
        return Err(Error::Numerical("non-finite CMA update".into()));
    }
    Ok(proposed)
}

/// A plain CMA-ES loop composed from the operations above, without any
/// learning-rate scaling.
#[derive(Debug, Clone)]
pub struct PlainCmaEs {
    pub params: DistributionParams,
    pub paths: EvolutionPaths,
    pub strategy: StrategyParams,
}

impl PlainCmaEs {
    pub fn new(mean: DVector<f64>, sigma: f64, lambda: Option<usize>) -> Result<Self> {
        let params = DistributionParams::new(mean, sigma)?;
        let strategy = StrategyParams::new(params.dim(), lambda)?;
        Ok(Self {
            paths: EvolutionPaths::new(params.dim()),
            params,
            strategy,
        })
    }

    /// One generation; `f` is called for each candidate in sample order.
    pub fn step<R, F>(&mut self, rng: &mut R, mut f: F) -> Result<()>
    where
        R: Rng + ?Sized,
        F: FnMut(&DVector<f64>, &mut R) -> f64,
    {
        let mut pop = sample_population(&self.params, &self.strategy, rng)?;
        let fitness = pop.xs.iter().map(|x| f(x, rng)).collect();
        pop.set_fitness(fitness)?;
        let (dy, dz) = rank_and_recombine(&pop, &self.strategy)?;
        let (paths, h_sigma) = update_paths(&self.paths, &dy, &dz, &self.strategy);
        self.params = cma_candidate_update(&self.params, &paths, h_sigma, &dy, &pop, &self.strategy)?;
        self.paths = paths;
        Ok(())
    }
}
