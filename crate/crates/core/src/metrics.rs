//! Distances between intensities and functionals of posterior draws.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::inference::PosteriorChain;
use crate::point_process::IntensityField;

/// `(∫ (sqrt a - sqrt b)^2)^{1/2}` by the trapezoidal rule on the shared
/// grid.
pub fn sqrt_l2_distance(a: &IntensityField, b: &IntensityField) -> Result<f64> {
    a.grid().check_same(b.grid())?;
    let sq: Vec<f64> = a.values().iter().zip(b.values()).map(|(x, y)| (x.sqrt() - y.sqrt()).powi(2)).collect();
    Ok(a.grid().trapezoid_integrate(&sq).sqrt())
}

/// `min(d, 1)`, the Hellinger-equivalent scale of a square-root distance.
pub fn hellinger_surrogate(d: f64) -> f64 {
    d.min(1.0)
}

/// Distance of every kept draw to the truth.
pub fn posterior_distances(chain: &PosteriorChain, truth: &IntensityField) -> Result<Vec<f64>> {
    chain.draws.iter().map(|d| sqrt_l2_distance(d, truth)).collect()
}

/// Fraction of kept draws at distance at least `radius` from the truth.
pub fn posterior_mass_outside(chain: &PosteriorChain, truth: &IntensityField, radius: f64) -> Result<f64> {
    if chain.is_empty() {
        return Err(invalid("posterior chain has no draws"));
    }
    Ok(mass_outside(&posterior_distances(chain, truth)?, radius))
}

pub(crate) fn mass_outside(distances: &[f64], radius: f64) -> f64 {
    distances.iter().filter(|&&d| d >= radius).count() as f64 / distances.len() as f64
}

/// Ordinary least squares fit of `log distance` on `log n`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RateFit {
    pub slope: f64,
    pub intercept: f64,
    pub slope_se: f64,
}

pub fn fit_rate_slope(points: &[(f64, f64)]) -> Result<RateFit> {
    if points.len() < 3 {
        return Err(invalid("rate fit needs at least three points"));
    }
    if points.iter().any(|&(n, d)| !(n > 0.0) || !(d > 0.0)) {
        return Err(invalid("rate fit needs positive sample sizes and distances"));
    }
    let mut ns: Vec<f64> = points.iter().map(|p| p.0).collect();
    ns.sort_by(f64::total_cmp);
    if ns.windows(2).any(|w| w[0] == w[1]) {
        return Err(invalid("rate fit needs distinct sample sizes"));
    }
    let xs: Vec<f64> = points.iter().map(|p| p.0.ln()).collect();
    let ys: Vec<f64> = points.iter().map(|p| p.1.ln()).collect();
    let k = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / k;
    let my = ys.iter().sum::<f64>() / k;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let rss: f64 = xs.iter().zip(&ys).map(|(x, y)| (y - intercept - slope * x).powi(2)).sum();
    let slope_se = (rss / (k - 2.0) / sxx).sqrt();
    Ok(RateFit { slope, intercept, slope_se })
}
