use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use super::model::{log_unnormalized_posterior, log_white_prior, Dataset, Model, ModelState};
use crate::error::{invalid, Error, Result};
use crate::grid::Grid;
use crate::kernel::CovarianceFactor;
use crate::point_process::IntensityField;
use crate::seed::rng_from_seed;

const TARGET_ACCEPTANCE: f64 = 0.3;
const MAX_SHRINKS: usize = 200;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChainConfig {
    pub iterations: usize,
    pub burn_in: usize,
    pub thin: usize,
    pub rw_step_ell: f64,
    pub rw_step_lambda: f64,
    /// Robbins–Monro tuning of the random-walk steps during burn-in,
    /// frozen afterwards.
    pub adapt: bool,
    /// When false, `ell` and `lambda_star` stay at their initial values.
    pub update_hyper: bool,
    /// Iterations between comparisons of the cached log posterior with a
    /// from-scratch evaluation; zero disables the check.
    pub checkpoint_every: usize,
    pub seed: u64,
}

impl Default for ChainConfig {
    fn default() -> Self {
        Self {
            iterations: 20_000,
            burn_in: 5_000,
            thin: 5,
            rw_step_ell: 0.3,
            rw_step_lambda: 0.3,
            adapt: true,
            update_hyper: true,
            checkpoint_every: 1_000,
            seed: 0,
        }
    }
}

impl ChainConfig {
    pub fn validate(&self) -> Result<()> {
        if self.burn_in >= self.iterations {
            return Err(invalid("burn_in must be below iterations"));
        }
        if self.thin == 0 {
            return Err(invalid("thinning stride must be at least 1"));
        }
        if !(self.rw_step_ell > 0.0 && self.rw_step_lambda > 0.0) {
            return Err(invalid("random-walk steps must be positive"));
        }
        Ok(())
    }

    pub fn kept_draws(&self) -> usize {
        (self.iterations - self.burn_in).div_ceil(self.thin)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct AcceptanceRates {
    pub latent: f64,
    pub ell: f64,
    pub lambda_star: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LatentOutcome {
    pub accepted: bool,
    pub shrinks: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct HyperOutcome {
    pub ell_accepted: bool,
    pub lambda_accepted: bool,
    pub factorization_failed: bool,
}

/// Sampler state with cached covariance factor, latent field, intensity and
/// log-likelihood.
#[derive(Debug, Clone)]
pub struct Sampler {
    model: Model,
    data: Dataset,
    state: ModelState,
    factor: CovarianceFactor,
    latent: Vec<f64>,
    intensity: Vec<f64>,
    log_lik: f64,
}

impl Sampler {
    pub fn new(model: Model, data: Dataset, state: ModelState) -> Result<Self> {
        model.grid.check_same(data.grid())?;
        if state.white.len() != model.grid.node_count() {
            return Err(Error::DimensionMismatch { expected: model.grid.node_count(), found: state.white.len() });
        }
        let factor = model.factor(state.log_ell.exp())?;
        let latent = factor.apply(&state.white);
        let intensity = model.intensity_values(state.log_lambda_star, &latent);
        let log_lik = data.log_likelihood(&intensity, model.likelihood);
        Ok(Self { model, data, state, factor, latent, intensity, log_lik })
    }

    /// Default starting point: zero whitened field, `ell` at its prior
    /// median, `lambda_star` at 1.5 times the mean count per pattern (prior
    /// median when there are no points).
    pub fn initial_state(model: &Model, data: &Dataset) -> ModelState {
        let ell = model.prior.length_scale.median();
        let ceiling = if data.total_points() > 0 {
            1.5 * data.total_points() as f64 / data.n_patterns() as f64
        } else {
            model.prior.max_intensity.gamma.median()
        };
        ModelState { white: vec![0.0; model.grid.node_count()], log_ell: ell.ln(), log_lambda_star: ceiling.ln() }
    }

    pub fn state(&self) -> &ModelState {
        &self.state
    }

    pub fn model(&self) -> &Model {
        &self.model
    }

    pub fn latent(&self) -> &[f64] {
        &self.latent
    }

    pub fn intensity(&self) -> &[f64] {
        &self.intensity
    }

    pub fn intensity_field(&self) -> IntensityField {
        IntensityField::new(self.model.grid, self.intensity.clone()).expect("intensity is nonnegative")
    }

    pub fn ell(&self) -> f64 {
        self.state.log_ell.exp()
    }

    pub fn lambda_star(&self) -> f64 {
        self.state.log_lambda_star.exp()
    }

    pub fn log_likelihood(&self) -> f64 {
        self.log_lik
    }

    /// Log posterior assembled from cached pieces.
    pub fn log_posterior(&self) -> f64 {
        log_white_prior(&self.state.white)
            + self.model.log_hyper_prior(self.state.log_ell, self.state.log_lambda_star)
            + self.log_lik
    }

    pub fn log_posterior_from_scratch(&self) -> Result<f64> {
        log_unnormalized_posterior(&self.model, &self.state, &self.data)
    }

    /// Swaps in new observations (used by the successive-conditional
    /// simulator).
    pub fn set_data(&mut self, data: Dataset) -> Result<()> {
        self.model.grid.check_same(data.grid())?;
        self.log_lik = data.log_likelihood(&self.intensity, self.model.likelihood);
        self.data = data;
        Ok(())
    }

    /// Elliptical slice update of the whitened field.
    pub fn update_latent<R: Rng + ?Sized>(&mut self, rng: &mut R) -> LatentOutcome {
        let n = self.state.white.len();
        let nu: Vec<f64> = (0..n).map(|_| rng.sample(StandardNormal)).collect();
        let u: f64 = rng.random();
        let threshold = self.log_lik + (1.0 - u).ln();
        let mut theta = rng.random::<f64>() * std::f64::consts::TAU;
        let (mut lo, mut hi) = (theta - std::f64::consts::TAU, theta);
        let mut white = vec![0.0; n];
        let mut latent = vec![0.0; n];
        for shrinks in 0..MAX_SHRINKS {
            let (s, c) = theta.sin_cos();
            for i in 0..n {
                white[i] = self.state.white[i] * c + nu[i] * s;
            }
            self.factor.apply_into(&white, &mut latent);
            let intensity = self.model.intensity_values(self.state.log_lambda_star, &latent);
            let log_lik = self.data.log_likelihood(&intensity, self.model.likelihood);
            if log_lik > threshold {
                self.state.white = white;
                self.latent = latent;
                self.intensity = intensity;
                self.log_lik = log_lik;
                return LatentOutcome { accepted: true, shrinks };
            }
            if theta < 0.0 {
                lo = theta;
            } else {
                hi = theta;
            }
            theta = lo + rng.random::<f64>() * (hi - lo);
        }
        LatentOutcome { accepted: false, shrinks: MAX_SHRINKS }
    }

    /// Random-walk Metropolis on `log ell` then on `log lambda_star`.
    pub fn update_hyper<R: Rng + ?Sized>(&mut self, step_ell: f64, step_lambda: f64, rng: &mut R) -> HyperOutcome {
        let mut out = HyperOutcome::default();

        let log_ell = self.state.log_ell + step_ell * rng.sample::<f64, _>(StandardNormal);
        let u: f64 = rng.random();
        match self.model.factor(log_ell.exp()) {
            Ok(factor) => {
                let latent = factor.apply(&self.state.white);
                let intensity = self.model.intensity_values(self.state.log_lambda_star, &latent);
                let log_lik = self.data.log_likelihood(&intensity, self.model.likelihood);
                let log_ratio = log_lik - self.log_lik
                    + self.model.log_hyper_prior(log_ell, self.state.log_lambda_star)
                    - self.model.log_hyper_prior(self.state.log_ell, self.state.log_lambda_star);
                if u.ln() < log_ratio {
                    self.state.log_ell = log_ell;
                    self.factor = factor;
                    self.latent = latent;
                    self.intensity = intensity;
                    self.log_lik = log_lik;
                    out.ell_accepted = true;
                }
            }
            Err(_) => out.factorization_failed = true,
        }

        let log_lambda = self.state.log_lambda_star + step_lambda * rng.sample::<f64, _>(StandardNormal);
        let u: f64 = rng.random();
        let intensity = self.model.intensity_values(log_lambda, &self.latent);
        let log_lik = self.data.log_likelihood(&intensity, self.model.likelihood);
        let log_ratio = log_lik - self.log_lik + self.model.log_hyper_prior(self.state.log_ell, log_lambda)
            - self.model.log_hyper_prior(self.state.log_ell, self.state.log_lambda_star);
        if u.ln() < log_ratio {
            self.state.log_lambda_star = log_lambda;
            self.intensity = intensity;
            self.log_lik = log_lik;
            out.lambda_accepted = true;
        }
        out
    }
}

/// Kept draws of a single chain.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PosteriorChain {
    pub grid: Grid,
    pub iterations: Vec<usize>,
    pub ell: Vec<f64>,
    pub lambda_star: Vec<f64>,
    pub log_posterior: Vec<f64>,
    pub draws: Vec<IntensityField>,
    /// Acceptance rates after burn-in.
    pub acceptance: AcceptanceRates,
    pub final_step_ell: f64,
    pub final_step_lambda: f64,
    pub factorization_failures: usize,
    /// Largest gap between cached and recomputed log posterior seen at
    /// checkpoints.
    pub max_checkpoint_drift: f64,
    /// True when there were no observed patterns.
    pub prior_only: bool,
}

impl PosteriorChain {
    pub fn len(&self) -> usize {
        self.draws.len()
    }

    pub fn is_empty(&self) -> bool {
        self.draws.is_empty()
    }
}

/// Runs one chain from the default initial state.
pub fn run_chain(model: &Model, data: &Dataset, config: &ChainConfig) -> Result<PosteriorChain> {
    config.validate()?;
    let mut rng = rng_from_seed(config.seed);
    let fail = |iteration: usize| move |e: Error| Error::Chain { iteration, source: Box::new(e) };
    let init = Sampler::initial_state(model, data);
    let mut sampler = Sampler::new(*model, data.clone(), init).map_err(fail(0))?;

    let (mut step_ell, mut step_lambda) = (config.rw_step_ell, config.rw_step_lambda);
    let kept = config.kept_draws();
    let mut chain = PosteriorChain {
        grid: model.grid,
        iterations: Vec::with_capacity(kept),
        ell: Vec::with_capacity(kept),
        lambda_star: Vec::with_capacity(kept),
        log_posterior: Vec::with_capacity(kept),
        draws: Vec::with_capacity(kept),
        acceptance: AcceptanceRates::default(),
        final_step_ell: step_ell,
        final_step_lambda: step_lambda,
        factorization_failures: 0,
        max_checkpoint_drift: 0.0,
        prior_only: data.n_patterns() == 0,
    };
    let (mut latent_acc, mut ell_acc, mut lambda_acc) = (0usize, 0usize, 0usize);

    for it in 0..config.iterations {
        let latent = sampler.update_latent(&mut rng);
        let hyper = if config.update_hyper {
            sampler.update_hyper(step_ell, step_lambda, &mut rng)
        } else {
            HyperOutcome::default()
        };
        chain.factorization_failures += hyper.factorization_failed as usize;

        if it < config.burn_in {
            if config.adapt && config.update_hyper {
                let gain = (it as f64 + 1.0).powf(-0.6);
                step_ell = (step_ell.ln() + gain * (hyper.ell_accepted as u8 as f64 - TARGET_ACCEPTANCE))
                    .exp()
                    .clamp(1e-4, 10.0);
                step_lambda = (step_lambda.ln()
                    + gain * (hyper.lambda_accepted as u8 as f64 - TARGET_ACCEPTANCE))
                    .exp()
                    .clamp(1e-4, 10.0);
            }
        } else {
            latent_acc += latent.accepted as usize;
            ell_acc += hyper.ell_accepted as usize;
            lambda_acc += hyper.lambda_accepted as usize;
            if (it - config.burn_in) % config.thin == 0 {
                chain.iterations.push(it);
                chain.ell.push(sampler.ell());
                chain.lambda_star.push(sampler.lambda_star());
                chain.log_posterior.push(sampler.log_posterior());
                chain.draws.push(sampler.intensity_field());
            }
        }

        if config.checkpoint_every > 0 && (it + 1) % config.checkpoint_every == 0 {
            let fresh = sampler.log_posterior_from_scratch().map_err(fail(it))?;
            let drift = (fresh - sampler.log_posterior()).abs();
            if drift.is_finite() {
                chain.max_checkpoint_drift = chain.max_checkpoint_drift.max(drift);
            }
        }
    }

    let post = (config.iterations - config.burn_in) as f64;
    chain.acceptance = AcceptanceRates {
        latent: latent_acc as f64 / post,
        ell: if config.update_hyper { ell_acc as f64 / post } else { 0.0 },
        lambda_star: if config.update_hyper { lambda_acc as f64 / post } else { 0.0 },
    };
    chain.final_step_ell = step_ell;
    chain.final_step_lambda = step_lambda;
    Ok(chain)
}
