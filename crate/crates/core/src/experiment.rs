//! The contraction-rate experiment: for increasing numbers of observed
//! patterns, simulate data from a known truth, run the posterior, and
//! track how fast the posterior concentrates around the truth in the
//! square-root L2 distance.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::grid::Grid;
use crate::inference::{run_chain, ChainConfig, Dataset, Model};
use crate::metrics::{fit_rate_slope, mass_outside, posterior_distances, RateFit};
use crate::point_process::{simulate_thinning, IntensityField, PointPattern};
use crate::seed::{derive_seed, rng_from_seed, tags};
use crate::stats::{mean, median, quantile};

/// Built-in closed-form truths.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TruthKind {
    /// `2 + mean_j sin(2 pi s_j)`; analytic.
    Sine,
    /// `2 + 0.8 * mean_j S(s_j) / S_max` with the lacunary-free series
    /// `S(x) = sum_{k<=64} k^{-3} sin(2 pi k x)`; nominal smoothness 2.
    Holder2,
    /// Constant, equal to `floor`.
    Constant,
}

const HOLDER_TERMS: usize = 64;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TruthSpec {
    pub name: String,
    pub kind: TruthKind,
    /// Nominal Hölder smoothness; `None` for analytic truths.
    pub beta: Option<f64>,
    /// Positive lower bound on the truth.
    pub floor: f64,
}

impl TruthSpec {
    pub fn catalog() -> Vec<TruthSpec> {
        vec![
            TruthSpec { name: "sine".into(), kind: TruthKind::Sine, beta: None, floor: 1.0 },
            TruthSpec { name: "holder2".into(), kind: TruthKind::Holder2, beta: Some(2.0), floor: 1.2 },
            TruthSpec { name: "constant".into(), kind: TruthKind::Constant, beta: None, floor: 4.0 },
        ]
    }

    /// A catalog entry, or `constant:<level>` for any positive level.
    pub fn by_name(name: &str) -> Result<TruthSpec> {
        if let Some(level) = name.strip_prefix("constant:") {
            let level: f64 = level.parse().map_err(|_| invalid(format!("bad constant level in {name:?}")))?;
            if !(level > 0.0 && level.is_finite()) {
                return Err(invalid(format!("constant truth level must be positive, got {level}")));
            }
            return Ok(TruthSpec { name: name.into(), kind: TruthKind::Constant, beta: None, floor: level });
        }
        Self::catalog()
            .into_iter()
            .find(|t| t.name == name)
            .ok_or_else(|| invalid(format!("unknown truth {name:?}")))
    }

    pub fn eval(&self, s: &[f64]) -> f64 {
        let d = s.len() as f64;
        match self.kind {
            TruthKind::Sine => 2.0 + s.iter().map(|x| (std::f64::consts::TAU * x).sin()).sum::<f64>() / d,
            TruthKind::Holder2 => {
                let norm: f64 = (1..=HOLDER_TERMS).map(|k| (k as f64).powi(-3)).sum();
                let series = |x: f64| {
                    (1..=HOLDER_TERMS)
                        .map(|k| (k as f64).powi(-3) * (std::f64::consts::TAU * k as f64 * x).sin())
                        .sum::<f64>()
                };
                2.0 + 0.8 * s.iter().map(|&x| series(x)).sum::<f64>() / (d * norm)
            }
            TruthKind::Constant => self.floor,
        }
    }

    /// The truth sampled at the grid nodes; fails if it dips below the
    /// floor.
    pub fn field(&self, grid: &Grid) -> Result<IntensityField> {
        let f = IntensityField::from_fn(*grid, |s| self.eval(s))?;
        if f.min() < self.floor {
            return Err(invalid(format!("truth {} drops below its floor {}", self.name, self.floor)));
        }
        Ok(f)
    }

    /// `-beta / (2 beta + d)`, or `-1/2` for analytic truths.
    pub fn target_exponent(&self, dim: usize) -> f64 {
        match self.beta {
            Some(b) => -b / (2.0 * b + dim as f64),
            None => -0.5,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub n_list: Vec<usize>,
    pub replicates: usize,
    /// Radius multiplier `M` for the mass-outside functional.
    pub radius_constant: f64,
    pub chain: ChainConfig,
    pub seed: u64,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            n_list: vec![25, 50, 100, 200, 400],
            replicates: 8,
            radius_constant: 2.0,
            chain: ChainConfig::default(),
            seed: 0,
        }
    }
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_list.is_empty() || self.n_list[0] == 0 || self.n_list.windows(2).any(|w| w[0] >= w[1]) {
            return Err(invalid("n_list must be strictly increasing positive counts"));
        }
        if self.replicates == 0 {
            return Err(invalid("replicates must be positive"));
        }
        if !(self.radius_constant > 0.0) {
            return Err(invalid("radius constant must be positive"));
        }
        self.chain.validate()
    }
}

/// Outcome of one `(n, replicate)` cell.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellResult {
    pub n: usize,
    pub replicate: usize,
    pub seed: u64,
    pub median_distance: f64,
    pub mass_outside: f64,
    pub credible_radius: f64,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NSummary {
    pub n: usize,
    /// Median over replicates of the per-chain median distance.
    pub median_distance: f64,
    /// Mean over replicates of the posterior mass outside `radius`.
    pub mass_outside: f64,
    /// Median over replicates of the 95% posterior distance quantile.
    pub credible_radius: f64,
    pub radius: f64,
    pub replicates_ok: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContractionReport {
    pub truth: String,
    pub beta: Option<f64>,
    pub dim: usize,
    pub target_exponent: f64,
    pub per_n: Vec<NSummary>,
    pub cells: Vec<CellResult>,
    pub fit: Option<RateFit>,
    pub failed_cells: usize,
    pub config: ExperimentConfig,
}

impl ContractionReport {
    /// Number of consecutive increases of the median distance along `n`.
    pub fn inversions(&self) -> usize {
        self.per_n.windows(2).filter(|w| w[1].median_distance > w[0].median_distance).count()
    }

    fn finish(mut self) -> Self {
        let pts: Vec<(f64, f64)> = self
            .per_n
            .iter()
            .filter(|s| s.replicates_ok > 0)
            .map(|s| (s.n as f64, s.median_distance))
            .collect();
        self.fit = fit_rate_slope(&pts).ok();
        self
    }
}

/// Simulates `n` patterns from the truth field.
pub fn simulate_patterns(truth: &IntensityField, n: usize, seed: u64) -> Result<Vec<PointPattern>> {
    let mut rng = rng_from_seed(seed);
    let bound = truth.max();
    (0..n).map(|_| simulate_thinning(bound, truth, &mut rng)).collect()
}

fn run_cell(
    model: &Model,
    truth: &IntensityField,
    config: &ExperimentConfig,
    n: usize,
    radius: f64,
    seed: u64,
) -> Result<(f64, f64, f64)> {
    let patterns = simulate_patterns(truth, n, derive_seed(seed, &[tags::DATA]))?;
    let data = Dataset::new(&model.grid, &patterns)?;
    let chain_cfg = ChainConfig { seed: derive_seed(seed, &[tags::CHAIN]), ..config.chain };
    let chain = run_chain(model, &data, &chain_cfg)?;
    let distances = posterior_distances(&chain, truth)?;
    if distances.iter().any(|d| !d.is_finite()) {
        return Err(Error::NonConvergent("non-finite posterior distance".into()));
    }
    Ok((median(&distances), mass_outside(&distances, radius), quantile(&distances, 0.95)))
}

/// Runs every `(n, replicate)` cell (in parallel, each single-threaded)
/// and aggregates deterministically in cell order.
pub fn run_contraction_experiment(
    truth: &TruthSpec,
    model: &Model,
    config: &ExperimentConfig,
) -> Result<ContractionReport> {
    config.validate()?;
    let truth_field = truth.field(&model.grid)?;
    let dim = model.grid.dim();
    let exponent = truth.target_exponent(dim);

    let cells_spec: Vec<(usize, usize, usize)> = config
        .n_list
        .iter()
        .enumerate()
        .flat_map(|(i, &n)| (0..config.replicates).map(move |r| (i, n, r)))
        .collect();
    let cells: Vec<CellResult> = cells_spec
        .par_iter()
        .map(|&(i, n, r)| {
            let seed = derive_seed(config.seed, &[i as u64, r as u64]);
            let radius = config.radius_constant * (n as f64).powf(exponent);
            match run_cell(model, &truth_field, config, n, radius, seed) {
                Ok((median_distance, mass_outside, credible_radius)) => CellResult {
                    n,
                    replicate: r,
                    seed,
                    median_distance,
                    mass_outside,
                    credible_radius,
                    error: None,
                },
                Err(e) => CellResult {
                    n,
                    replicate: r,
                    seed,
                    median_distance: f64::NAN,
                    mass_outside: f64::NAN,
                    credible_radius: f64::NAN,
                    error: Some(e.to_string()),
                },
            }
        })
        .collect();

    let per_n = config
        .n_list
        .iter()
        .map(|&n| {
            let ok: Vec<&CellResult> = cells.iter().filter(|c| c.n == n && c.error.is_none()).collect();
            let pick = |f: fn(&CellResult) -> f64| ok.iter().map(|c| f(c)).collect::<Vec<_>>();
            NSummary {
                n,
                median_distance: median(&pick(|c| c.median_distance)),
                mass_outside: if ok.is_empty() { f64::NAN } else { mean(&pick(|c| c.mass_outside)) },
                credible_radius: median(&pick(|c| c.credible_radius)),
                radius: config.radius_constant * (n as f64).powf(exponent),
                replicates_ok: ok.len(),
            }
        })
        .collect();

    Ok(ContractionReport {
        truth: truth.name.clone(),
        beta: truth.beta,
        dim,
        target_exponent: exponent,
        per_n,
        failed_cells: cells.iter().filter(|c| c.error.is_some()).count(),
        cells,
        fit: None,
        config: config.clone(),
    }
    .finish())
}

/// A report whose distances are injected as `scale * n^exponent` instead of
/// being measured, for checking the fitting and reporting path.
pub fn synthetic_report(truth: &TruthSpec, dim: usize, config: &ExperimentConfig, scale: f64, exponent: f64) -> Result<ContractionReport> {
    config.validate()?;
    let target = truth.target_exponent(dim);
    let cells: Vec<CellResult> = config
        .n_list
        .iter()
        .enumerate()
        .flat_map(|(i, &n)| {
            (0..config.replicates).map(move |r| {
                let d = scale * (n as f64).powf(exponent);
                CellResult {
                    n,
                    replicate: r,
                    seed: derive_seed(config.seed, &[i as u64, r as u64]),
                    median_distance: d,
                    mass_outside: 0.0,
                    credible_radius: d,
                    error: None,
                }
            })
        })
        .collect();
    let per_n = config
        .n_list
        .iter()
        .map(|&n| {
            let d = scale * (n as f64).powf(exponent);
            NSummary {
                n,
                median_distance: d,
                mass_outside: 0.0,
                credible_radius: d,
                radius: config.radius_constant * (n as f64).powf(target),
                replicates_ok: config.replicates,
            }
        })
        .collect();
    Ok(ContractionReport {
        truth: truth.name.clone(),
        beta: truth.beta,
        dim,
        target_exponent: target,
        per_n,
        cells,
        fit: None,
        failed_cells: 0,
        config: config.clone(),
    }
    .finish())
}
