//! Joint-distribution test of the sampler: the marginal-conditional
//! simulator draws parameters from the prior and data given parameters;
//! the successive-conditional simulator alternates one sampler sweep with
//! fresh data. Both target the same joint law, so moments of any statistic
//! must agree.

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::mcmc::Sampler;
use super::model::{Dataset, Model, ModelState};
use crate::error::{invalid, Result};
use crate::kernel::CovarianceFactor;
use crate::point_process::{integrate_field, simulate_thinning, IntensityField, PointPattern};
use crate::prior::sample_prior_intensity;
use crate::stats::{batch_means_se, mean, variance};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GewekeConfig {
    pub rounds: usize,
    /// Patterns simulated per round.
    pub patterns: usize,
    pub rw_step_ell: f64,
    pub rw_step_lambda: f64,
    pub batches: usize,
    /// A statistic fails when `|z|` reaches this value.
    pub threshold: f64,
    /// Bound on the expected candidate count `lambda_star * patterns` of a
    /// successive round; beyond it the chain is declared divergent.
    pub max_candidates: f64,
}

impl Default for GewekeConfig {
    fn default() -> Self {
        Self { rounds: 50_000, patterns: 2, rw_step_ell: 0.8, rw_step_lambda: 0.5, batches: 50, threshold: 4.0, max_candidates: 1e5 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GewekeStatistic {
    pub name: String,
    pub marginal_mean: f64,
    pub marginal_se: f64,
    pub successive_mean: f64,
    pub successive_se: f64,
    pub z: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GewekeReport {
    pub rounds: usize,
    pub threshold: f64,
    pub statistics: Vec<GewekeStatistic>,
    pub max_abs_z: f64,
    pub passed: bool,
    /// Round at which the successive simulator ran away, if it did.
    pub diverged_at: Option<usize>,
}

const NAMES: [&str; 5] = ["lambda_star", "ell", "mean_intensity", "data_count", "latent_mid"];

fn simulate<R: Rng + ?Sized>(
    ceiling: f64,
    field: &IntensityField,
    patterns: usize,
    rng: &mut R,
) -> Result<Vec<PointPattern>> {
    (0..patterns).map(|_| simulate_thinning(ceiling, field, rng)).collect()
}

fn statistics(ceiling: f64, ell: f64, field: &IntensityField, latent: &[f64], data: &[PointPattern]) -> [f64; 5] {
    let count: usize = data.iter().map(PointPattern::len).sum();
    [ceiling, ell, integrate_field(field), count as f64, latent[latent.len() / 2]]
}

pub fn geweke_joint_test<R: Rng + ?Sized>(model: &Model, config: &GewekeConfig, rng: &mut R) -> Result<GewekeReport> {
    if config.rounds < 10 * config.batches.max(2) {
        return Err(invalid("Geweke test needs at least ten rounds per batch"));
    }
    let grid = model.grid;
    let rounds = config.rounds;

    let mut marginal = vec![Vec::with_capacity(rounds); NAMES.len()];
    for _ in 0..rounds {
        let draw = sample_prior_intensity(&model.prior, &grid, rng)?;
        let data = simulate(draw.lambda_star, &draw.intensity, config.patterns, rng)?;
        let s = statistics(draw.lambda_star, draw.ell, &draw.intensity, &draw.latent.values, &data);
        for (trace, v) in marginal.iter_mut().zip(s) {
            trace.push(v);
        }
    }

    let start = sample_prior_intensity(&model.prior, &grid, rng)?;
    let factor = CovarianceFactor::for_grid(&model.prior.kernel.with_ell(start.ell)?, &grid)?;
    let state = ModelState {
        white: factor.whiten(&start.latent.values),
        log_ell: start.ell.ln(),
        log_lambda_star: start.lambda_star.ln(),
    };
    let mut data = simulate(start.lambda_star, &start.intensity, config.patterns, rng)?;
    let mut sampler = Sampler::new(*model, Dataset::new(&grid, &data)?, state)?;
    let mut successive = vec![Vec::with_capacity(rounds); NAMES.len()];
    let mut diverged_at = None;
    for round in 0..rounds {
        sampler.set_data(Dataset::new(&grid, &data)?)?;
        sampler.update_latent(rng);
        sampler.update_hyper(config.rw_step_ell, config.rw_step_lambda, rng);
        if !(sampler.lambda_star() * config.patterns as f64 <= config.max_candidates) {
            diverged_at = Some(round);
            break;
        }
        let field = sampler.intensity_field();
        data = simulate(sampler.lambda_star(), &field, config.patterns, rng)?;
        let s = statistics(sampler.lambda_star(), sampler.ell(), &field, sampler.latent(), &data);
        for (trace, v) in successive.iter_mut().zip(s) {
            trace.push(v);
        }
    }

    let statistics: Vec<GewekeStatistic> = NAMES
        .iter()
        .zip(marginal.iter().zip(&successive))
        .map(|(name, (m, s))| {
            let marginal_se = (variance(m) / m.len() as f64).sqrt();
            let successive_se = batch_means_se(s, config.batches);
            let (mm, sm) = (mean(m), mean(s));
            GewekeStatistic {
                name: (*name).to_string(),
                marginal_mean: mm,
                marginal_se,
                successive_mean: sm,
                successive_se,
                z: (mm - sm) / (marginal_se.powi(2) + successive_se.powi(2)).sqrt(),
            }
        })
        .collect();
    let max_abs_z = if diverged_at.is_some() {
        f64::INFINITY
    } else {
        statistics.iter().map(|s| s.z.abs()).fold(0.0, f64::max)
    };
    Ok(GewekeReport {
        rounds,
        threshold: config.threshold,
        passed: max_abs_z.is_finite() && max_abs_z < config.threshold,
        max_abs_z,
        statistics,
        diverged_at,
    })
}
