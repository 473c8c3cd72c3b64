use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{integrate_with, Grid};
use crate::kernel::CovarianceFactor;
use crate::point_process::PointPattern;
use crate::prior::SgcpPrior;

/// Which likelihood the sampler targets. `DropIntegral` omits the
/// `-∫(lambda - 1)` compensator; it exists only to demonstrate that the
/// calibration test detects a broken target.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LikelihoodForm {
    #[default]
    Standard,
    DropIntegral,
}

/// Prior hierarchy plus the discretization grid.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Model {
    pub prior: SgcpPrior,
    pub grid: Grid,
    pub likelihood: LikelihoodForm,
}

impl Model {
    pub fn new(prior: SgcpPrior, grid: Grid) -> Result<Self> {
        if prior.dim() != grid.dim() {
            return Err(Error::DimensionMismatch { expected: grid.dim(), found: prior.dim() });
        }
        Ok(Self { prior, grid, likelihood: LikelihoodForm::Standard })
    }

    pub fn with_likelihood(mut self, form: LikelihoodForm) -> Self {
        self.likelihood = form;
        self
    }

    pub fn factor(&self, ell: f64) -> Result<CovarianceFactor> {
        CovarianceFactor::for_grid(&self.prior.kernel.with_ell(ell)?, &self.grid)
    }

    /// Log prior of the hyperparameters on the log scale, Jacobians
    /// included.
    pub fn log_hyper_prior(&self, log_ell: f64, log_lambda_star: f64) -> f64 {
        self.prior.length_scale.ln_density(log_ell.exp())
            + log_ell
            + self.prior.max_intensity.gamma.ln_pdf(log_lambda_star.exp())
            + log_lambda_star
    }

    pub fn intensity_values(&self, log_lambda_star: f64, latent: &[f64]) -> Vec<f64> {
        let ceiling = log_lambda_star.exp();
        latent.iter().map(|&g| ceiling * self.prior.link.eval(g)).collect()
    }
}

pub(crate) fn log_white_prior(white: &[f64]) -> f64 {
    -0.5 * white.iter().map(|w| w * w).sum::<f64>()
        - 0.5 * white.len() as f64 * (2.0 * std::f64::consts::PI).ln()
}

/// Observed patterns with their interpolation stencils precomputed.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    grid: Grid,
    n_patterns: usize,
    total_points: usize,
    offsets: Vec<usize>,
    nodes: Vec<usize>,
    weights: Vec<f64>,
    trapezoid: Vec<f64>,
    cells: f64,
}

impl Dataset {
    pub fn new(grid: &Grid, patterns: &[PointPattern]) -> Result<Self> {
        let mut offsets = vec![0];
        let mut nodes = Vec::new();
        let mut weights = Vec::new();
        for pattern in patterns {
            if pattern.dim() != grid.dim() {
                return Err(Error::DimensionMismatch { expected: grid.dim(), found: pattern.dim() });
            }
            for p in pattern.points() {
                for (i, w) in grid.stencil(p)? {
                    nodes.push(i);
                    weights.push(w);
                }
                offsets.push(nodes.len());
            }
        }
        Ok(Self {
            grid: *grid,
            n_patterns: patterns.len(),
            total_points: offsets.len() - 1,
            offsets,
            nodes,
            weights,
            trapezoid: grid.trapezoid_coefficients(),
            cells: grid.cell_count(),
        })
    }

    pub fn empty(grid: &Grid) -> Self {
        Self::new(grid, &[]).expect("empty dataset is valid")
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn n_patterns(&self) -> usize {
        self.n_patterns
    }

    pub fn total_points(&self) -> usize {
        self.total_points
    }

    /// Log-likelihood of all patterns under the interpolated intensity with
    /// the given node values.
    pub fn log_likelihood(&self, values: &[f64], form: LikelihoodForm) -> f64 {
        let mut total = 0.0;
        for k in 0..self.total_points {
            let lambda: f64 = (self.offsets[k]..self.offsets[k + 1])
                .map(|j| self.weights[j] * values[self.nodes[j]])
                .sum();
            if lambda <= 0.0 {
                return f64::NEG_INFINITY;
            }
            total += lambda.ln();
        }
        if form == LikelihoodForm::Standard && self.n_patterns > 0 {
            let integral = integrate_with(&self.trapezoid, self.cells, values);
            total -= self.n_patterns as f64 * (integral - 1.0);
        }
        total
    }
}

/// A point of the sampler's state space.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelState {
    pub white: Vec<f64>,
    pub log_ell: f64,
    pub log_lambda_star: f64,
}

/// Unnormalized log posterior of a state, computed from scratch: standard
/// normal prior of the whitened field, hyperpriors with log-scale
/// Jacobians, and the Poisson likelihood.
pub fn log_unnormalized_posterior(model: &Model, state: &ModelState, data: &Dataset) -> Result<f64> {
    model.grid.check_same(data.grid())?;
    if state.white.len() != model.grid.node_count() {
        return Err(Error::DimensionMismatch { expected: model.grid.node_count(), found: state.white.len() });
    }
    let factor = model.factor(state.log_ell.exp())?;
    let latent = factor.apply(&state.white);
    let values = model.intensity_values(state.log_lambda_star, &latent);
    Ok(log_white_prior(&state.white)
        + model.log_hyper_prior(state.log_ell, state.log_lambda_star)
        + data.log_likelihood(&values, model.likelihood))
}
