//! Stationary Gaussian process kernels in spectral form.
//!
//! The covariance of the latent process is
//! `E g(s) g(t) = ∫ exp(-i <ξ, ell (t - s)>) μ(ξ) dξ`
//! for an isotropic spectral density `μ` and inverse length scale `ell`.
//! The centered Gaussian density with covariance `2 I` gives the
//! squared-exponential kernel `exp(-ell^2 |t - s|^2)`.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};
use statrs::function::gamma::ln_gamma;

use crate::error::{invalid, Error, Result};
use crate::grid::Grid;
use crate::quadrature::{adaptive_gk, GaussHermite};

/// Largest grid handled by dense covariance factorization.
pub const MAX_DENSE_NODES: usize = 4096;

/// Jitter schedule for the covariance diagonal: 1e-10, escalating by ten up
/// to 1e-6.
pub const JITTER_SCHEDULE: [f64; 5] = [1e-10, 1e-9, 1e-8, 1e-7, 1e-6];

/// Spectral mass beyond the truncation radius tolerated by the adaptive
/// spectral quadrature.
const TAIL_TOLERANCE: f64 = 1e-10;
const TRUNCATION_CAP: f64 = 1e3;

/// Isotropic spectral densities on `R^d`, scaled by their total mass.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum SpectralDensity {
    /// Centered Gaussian with covariance `variance * I`.
    Gaussian { variance: f64, mass: f64 },
    /// Multivariate Cauchy, density proportional to
    /// `(1 + |ξ/scale|^2)^{-(d+1)/2}`. Its tail decays like `|ξ|^{-(d+1)}`,
    /// so it has no exponential moment and no finite second moment; it
    /// serves as a negative control.
    Cauchy { scale: f64, mass: f64 },
}

impl SpectralDensity {
    /// The Gaussian density matching the unit-variance squared-exponential
    /// kernel.
    pub const SQUARED_EXPONENTIAL: SpectralDensity =
        SpectralDensity::Gaussian { variance: 2.0, mass: 1.0 };

    pub fn validate(&self) -> Result<()> {
        let (a, m) = match *self {
            SpectralDensity::Gaussian { variance, mass } => (variance, mass),
            SpectralDensity::Cauchy { scale, mass } => (scale, mass),
        };
        if !(a > 0.0 && a.is_finite() && m > 0.0 && m.is_finite()) {
            return Err(invalid(format!("spectral density parameters must be positive: {self:?}")));
        }
        Ok(())
    }

    /// Total mass `‖μ‖`, which is also the marginal variance of the process.
    pub fn mass(&self) -> f64 {
        match *self {
            SpectralDensity::Gaussian { mass, .. } | SpectralDensity::Cauchy { mass, .. } => mass,
        }
    }

    /// Second moment `τ² = ∫ |ξ|^2 μ(ξ) dξ`; infinite for the Cauchy family.
    pub fn second_moment(&self, dim: usize) -> f64 {
        match *self {
            SpectralDensity::Gaussian { variance, mass } => mass * variance * dim as f64,
            SpectralDensity::Cauchy { .. } => f64::INFINITY,
        }
    }

    /// Log of the density value at any `ξ` with `|ξ| = r`.
    pub fn ln_density(&self, r: f64, dim: usize) -> f64 {
        let d = dim as f64;
        match *self {
            SpectralDensity::Gaussian { variance, mass } => {
                mass.ln() - 0.5 * d * (2.0 * std::f64::consts::PI * variance).ln()
                    - r * r / (2.0 * variance)
            }
            SpectralDensity::Cauchy { scale, mass } => {
                let c = ln_gamma((d + 1.0) / 2.0) - (d + 1.0) / 2.0 * std::f64::consts::PI.ln();
                mass.ln() + c - d * scale.ln() - (d + 1.0) / 2.0 * (r / scale).powi(2).ln_1p()
            }
        }
    }

    pub fn density(&self, r: f64, dim: usize) -> f64 {
        self.ln_density(r, dim).exp()
    }

    /// Mass outside the ball of radius `r`, where known in closed form.
    pub fn tail_mass(&self, r: f64, dim: usize) -> Option<f64> {
        match (*self, dim) {
            (SpectralDensity::Gaussian { variance, mass }, _) => {
                let chi = statrs::distribution::ChiSquared::new(dim as f64).ok()?;
                use statrs::distribution::ContinuousCDF;
                Some(mass * chi.sf(r * r / variance))
            }
            (SpectralDensity::Cauchy { scale, mass }, 1) => {
                Some(mass * (1.0 - 2.0 / std::f64::consts::PI * (r / scale).atan()))
            }
            (SpectralDensity::Cauchy { scale, mass }, 2) => {
                Some(mass / (1.0 + (r / scale).powi(2)).sqrt())
            }
            _ => None,
        }
    }
}

/// Kernel family.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "kebab-case")]
pub enum KernelFamily {
    /// `exp(-ell^2 |t - s|^2)` in closed form.
    SquaredExponential,
    /// Covariance computed from the spectral integral.
    Spectral { density: SpectralDensity },
}

/// A stationary kernel: family, inverse length scale, and the tilt `delta`
/// used for the exponential-moment check.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KernelSpec {
    pub family: KernelFamily,
    pub ell: f64,
    pub delta: f64,
}

impl KernelSpec {
    pub fn new(family: KernelFamily, ell: f64, delta: f64) -> Result<Self> {
        if !(ell > 0.0 && ell.is_finite()) {
            return Err(invalid(format!("inverse length scale must be positive, got {ell}")));
        }
        if !(delta > 0.0 && delta.is_finite()) {
            return Err(invalid(format!("delta must be positive, got {delta}")));
        }
        if let KernelFamily::Spectral { density } = family {
            density.validate()?;
        }
        Ok(Self { family, ell, delta })
    }

    pub fn squared_exponential(ell: f64) -> Result<Self> {
        Self::new(KernelFamily::SquaredExponential, ell, 1.0)
    }

    pub fn spectral(density: SpectralDensity, ell: f64) -> Result<Self> {
        Self::new(KernelFamily::Spectral { density }, ell, 1.0)
    }

    pub fn with_ell(&self, ell: f64) -> Result<Self> {
        Self::new(self.family, ell, self.delta)
    }

    /// The spectral density behind the kernel.
    pub fn spectral_density(&self) -> SpectralDensity {
        match self.family {
            KernelFamily::SquaredExponential => SpectralDensity::SQUARED_EXPONENTIAL,
            KernelFamily::Spectral { density } => density,
        }
    }

    pub fn marginal_variance(&self) -> f64 {
        self.spectral_density().mass()
    }
}

/// Covariance between the process at `s` and `t`.
pub fn kernel_eval(spec: &KernelSpec, s: &[f64], t: &[f64]) -> Result<f64> {
    if s.len() != t.len() {
        return Err(Error::DimensionMismatch { expected: s.len(), found: t.len() });
    }
    if s.iter().chain(t).any(|x| !(0.0..=1.0).contains(x)) {
        return Err(invalid("kernel arguments must lie in the unit cube"));
    }
    let lag: Vec<f64> = t.iter().zip(s).map(|(a, b)| a - b).collect();
    covariance_at_lag(spec, &lag)
}

fn covariance_at_lag(spec: &KernelSpec, lag: &[f64]) -> Result<f64> {
    match spec.family {
        KernelFamily::SquaredExponential => {
            let sq: f64 = lag.iter().map(|h| h * h).sum();
            Ok((-spec.ell * spec.ell * sq).exp())
        }
        KernelFamily::Spectral { .. } => spectral_covariance_quadrature(spec, lag),
    }
}

fn hermite_rule(order: usize) -> Arc<GaussHermite> {
    static RULES: OnceLock<Mutex<HashMap<usize, Arc<GaussHermite>>>> = OnceLock::new();
    let rules = RULES.get_or_init(|| Mutex::new(HashMap::new()));
    let mut guard = rules.lock().unwrap_or_else(|e| e.into_inner());
    guard.entry(order).or_insert_with(|| Arc::new(GaussHermite::new(order))).clone()
}

/// Real part of the spectral integral at `lag`.
///
/// Gaussian densities use a tensor Gauss–Hermite rule (evaluated as a
/// product of one-dimensional complex sums); other families fall back to
/// [`spectral_covariance_adaptive`]. Fails if the imaginary part exceeds
/// `1e-10`.
pub fn spectral_covariance_quadrature(spec: &KernelSpec, lag: &[f64]) -> Result<f64> {
    let density = spec.spectral_density();
    let SpectralDensity::Gaussian { variance, mass } = density else {
        return spectral_covariance_adaptive(spec, lag);
    };
    let scale = (2.0 * variance).sqrt() * spec.ell;
    let omega = lag.iter().fold(0.0f64, |m, h| m.max(h.abs())) * scale;
    // Exact to ~1e-15 while 0.7 * omega^2 < order.
    let order = ((0.7 * omega * omega + 48.0) / 32.0).ceil() as usize * 32;
    if order > 2048 {
        return Err(Error::NonConvergent(format!("frequency {omega} too high for Gauss-Hermite")));
    }
    let rule = hermite_rule(order);
    let norm = std::f64::consts::PI.sqrt();
    let (mut re, mut im) = (mass, 0.0);
    for &h in lag {
        let (mut r1, mut i1) = (0.0, 0.0);
        for (&x, &w) in rule.nodes.iter().zip(&rule.weights) {
            let phase = scale * h * x;
            r1 += w * phase.cos();
            i1 -= w * phase.sin();
        }
        let (r1, i1) = (r1 / norm, i1 / norm);
        (re, im) = (re * r1 - im * i1, re * i1 + im * r1);
    }
    if im.abs() > 1e-10 {
        return Err(Error::NonConvergent(format!("imaginary part {im:e} of spectral integral")));
    }
    Ok(re)
}

/// Truncation radius for the adaptive route: from the exponential moment
/// when it is finite (Chernoff bound), otherwise the cap.
fn truncation_radius(spec: &KernelSpec, dim: usize) -> Result<f64> {
    let density = spec.spectral_density();
    let radius = match check_exponential_moment(spec, dim) {
        ExponentialMoment::Finite(m) => ((m / TAIL_TOLERANCE).ln() / spec.delta).clamp(1.0, TRUNCATION_CAP),
        ExponentialMoment::Diverged => TRUNCATION_CAP,
    };
    let tail = density
        .tail_mass(radius, dim)
        .ok_or_else(|| Error::Unsupported(format!("tail mass of {density:?} in dimension {dim}")))?;
    if tail > TAIL_TOLERANCE {
        return Err(Error::NonConvergent(format!(
            "spectral mass {tail:e} beyond truncation radius {radius}"
        )));
    }
    Ok(radius)
}

/// Spectral integral by adaptive Gauss–Kronrod quadrature on a truncated
/// domain, using the even symmetry of isotropic densities. Supports
/// dimensions one and two.
pub fn spectral_covariance_adaptive(spec: &KernelSpec, lag: &[f64]) -> Result<f64> {
    let dim = lag.len();
    let density = spec.spectral_density();
    let radius = truncation_radius(spec, dim)?;
    let u: Vec<f64> = lag.iter().map(|h| h * spec.ell).collect();
    match dim {
        1 => {
            let (v, _) = adaptive_gk(
                |r| (r * u[0]).cos() * density.density(r, 1),
                0.0,
                radius,
                1e-13,
                1e-12,
                20_000,
            )?;
            Ok(2.0 * v)
        }
        2 => {
            let inner = |x: f64| -> f64 {
                adaptive_gk(
                    |y| (y * u[1]).cos() * density.density((x * x + y * y).sqrt(), 2),
                    0.0,
                    radius,
                    1e-14,
                    1e-12,
                    20_000,
                )
                .map(|(v, _)| v)
                .unwrap_or(f64::NAN)
            };
            let (v, _) = adaptive_gk(|x| (x * u[0]).cos() * inner(x), 0.0, radius, 1e-12, 1e-11, 20_000)?;
            Ok(4.0 * v)
        }
        _ => Err(Error::Unsupported(format!("adaptive spectral quadrature in dimension {dim}"))),
    }
}

/// Result of the exponential-moment check `∫ exp(delta |ξ|) μ(dξ) < ∞`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", content = "value", rename_all = "kebab-case")]
pub enum ExponentialMoment {
    Finite(f64),
    Diverged,
}

impl ExponentialMoment {
    pub fn is_finite(&self) -> bool {
        matches!(self, ExponentialMoment::Finite(_))
    }
}

fn unit_sphere_area(dim: usize) -> f64 {
    let d = dim as f64;
    2.0 * std::f64::consts::PI.powf(d / 2.0) / ln_gamma(d / 2.0).exp()
}

/// Evaluates `∫ exp(delta |ξ|) μ(dξ)` in polar form over dyadic shells.
/// The moment is declared finite once a shell contributes less than
/// `1e-15` of the running total, and divergent if the integrand overflows
/// or no such shell appears before radius `2^20`.
pub fn check_exponential_moment(spec: &KernelSpec, dim: usize) -> ExponentialMoment {
    let density = spec.spectral_density();
    let area = unit_sphere_area(dim);
    let delta = spec.delta;
    let integrand = |r: f64| {
        let log = delta * r + density.ln_density(r, dim) + (dim as f64 - 1.0) * r.ln();
        area * if dim == 1 && r == 0.0 { density.density(0.0, 1) } else { log.exp() }
    };
    let mut total = 0.0;
    let (mut lo, mut hi) = (0.0, 1.0);
    let mut previous = f64::INFINITY;
    while hi <= (1u64 << 20) as f64 {
        let shell = match adaptive_gk(integrand, lo, hi, 1e-300, 1e-12, 5_000) {
            Ok((v, _)) if v.is_finite() => v,
            _ => return ExponentialMoment::Diverged,
        };
        total += shell;
        if !total.is_finite() {
            return ExponentialMoment::Diverged;
        }
        if shell < 1e-15 * total && shell <= previous {
            return ExponentialMoment::Finite(total);
        }
        previous = shell;
        (lo, hi) = (hi, 2.0 * hi);
    }
    ExponentialMoment::Diverged
}

/// Dense covariance matrix of the process at the grid nodes. Stationarity
/// is used to evaluate the kernel once per distinct per-axis offset.
pub fn covariance_matrix(spec: &KernelSpec, grid: &Grid) -> Result<DMatrix<f64>> {
    let n = grid.node_count();
    if n > MAX_DENSE_NODES {
        return Err(Error::TooManyNodes { nodes: n, limit: MAX_DENSE_NODES });
    }
    let h = grid.spacing();
    let mut table = vec![f64::NAN; n];
    for (offset, slot) in table.iter_mut().enumerate() {
        let mut axes = grid.multi_index(offset);
        // Isotropy: only the multiset of absolute offsets matters.
        if axes.windows(2).any(|w| w[0] > w[1]) {
            continue;
        }
        axes.sort_unstable();
        let lag: Vec<f64> = axes.iter().map(|&i| i as f64 * h).collect();
        *slot = covariance_at_lag(spec, &lag)?;
    }
    let multi: Vec<Vec<usize>> = (0..n).map(|i| grid.multi_index(i)).collect();
    let mut scratch = vec![0usize; grid.dim()];
    let mut cov = DMatrix::zeros(n, n);
    for a in 0..n {
        for b in 0..=a {
            for (axis, slot) in scratch.iter_mut().enumerate() {
                *slot = multi[a][axis].abs_diff(multi[b][axis]);
            }
            scratch.sort_unstable();
            let v = table[grid.flat_index(&scratch)];
            cov[(a, b)] = v;
            cov[(b, a)] = v;
        }
    }
    Ok(cov)
}

/// Lower Cholesky factor of a covariance matrix plus the jitter that was
/// needed to obtain it.
#[derive(Debug, Clone)]
pub struct CovarianceFactor {
    lower: DMatrix<f64>,
    jitter: f64,
}

impl CovarianceFactor {
    /// Factorizes `cov + jitter I`, walking [`JITTER_SCHEDULE`].
    pub fn factorize(cov: DMatrix<f64>) -> Result<Self> {
        let n = cov.nrows();
        for &jitter in &JITTER_SCHEDULE {
            let mut m = cov.clone();
            for i in 0..n {
                m[(i, i)] += jitter;
            }
            if let Some(chol) = m.cholesky() {
                return Ok(Self { lower: chol.unpack(), jitter });
            }
        }
        Err(Error::Factorization { jitter: JITTER_SCHEDULE[JITTER_SCHEDULE.len() - 1] })
    }

    pub fn for_grid(spec: &KernelSpec, grid: &Grid) -> Result<Self> {
        Self::factorize(covariance_matrix(spec, grid)?)
    }

    pub fn jitter(&self) -> f64 {
        self.jitter
    }

    pub fn lower(&self) -> &DMatrix<f64> {
        &self.lower
    }

    pub fn dim(&self) -> usize {
        self.lower.nrows()
    }

    /// Maps whitened coordinates to the correlated field, `L w`.
    pub fn apply(&self, white: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; white.len()];
        self.apply_into(white, &mut out);
        out
    }

    pub fn apply_into(&self, white: &[f64], out: &mut [f64]) {
        let n = self.lower.nrows();
        debug_assert_eq!(white.len(), n);
        out.iter_mut().for_each(|o| *o = 0.0);
        // Column-major storage: accumulate column by column over the lower
        // triangle.
        for j in 0..n {
            let wj = white[j];
            if wj == 0.0 {
                continue;
            }
            let col = self.lower.column(j);
            for i in j..n {
                out[i] += col[i] * wj;
            }
        }
    }

    /// Solves `L w = g` for the whitened coordinates of a field.
    pub fn whiten(&self, field: &[f64]) -> Vec<f64> {
        let rhs = DVector::from_column_slice(field);
        self.lower
            .solve_lower_triangular(&rhs)
            .map(|v| v.iter().copied().collect())
            .unwrap_or_else(|| vec![f64::NAN; field.len()])
    }
}

/// A real-valued function on grid nodes (a latent Gaussian process draw or
/// a link-scale transform of an intensity).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LatentField {
    pub grid: Grid,
    pub values: Vec<f64>,
}

pub type GpSample = LatentField;

/// Exact zero-mean Gaussian draw at the grid nodes with covariance given by
/// the kernel (plus jitter).
pub fn sample_gp<R: Rng + ?Sized>(spec: &KernelSpec, grid: &Grid, rng: &mut R) -> Result<GpSample> {
    let factor = CovarianceFactor::for_grid(spec, grid)?;
    let white: Vec<f64> = (0..grid.node_count()).map(|_| rng.sample(StandardNormal)).collect();
    Ok(LatentField { grid: *grid, values: factor.apply(&white) })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn squared_exponential_closed_form() {
        let k = KernelSpec::squared_exponential(1.0).unwrap();
        assert_eq!(kernel_eval(&k, &[0.2], &[0.2]).unwrap(), 1.0);
        let v = kernel_eval(&k, &[0.0], &[1.0]).unwrap();
        assert!((v - 0.367_879_441_171_442_3).abs() < 1e-15);
        assert!(kernel_eval(&k, &[0.0], &[1.0, 0.0]).is_err());
        assert!(kernel_eval(&k, &[0.0], &[1.5]).is_err());
    }

    #[test]
    fn spec_validation() {
        assert!(KernelSpec::squared_exponential(0.0).is_err());
        assert!(KernelSpec::squared_exponential(-1.0).is_err());
        let bad = SpectralDensity::Gaussian { variance: -1.0, mass: 1.0 };
        assert!(KernelSpec::spectral(bad, 1.0).is_err());
    }

    #[test]
    fn spectral_at_zero_lag_is_mass() {
        let dens = SpectralDensity::Gaussian { variance: 0.7, mass: 2.5 };
        let k = KernelSpec::spectral(dens, 3.0).unwrap();
        assert!((spectral_covariance_quadrature(&k, &[0.0]).unwrap() - 2.5).abs() < 1e-12);
        assert!((spectral_covariance_quadrature(&k, &[0.0, 0.0]).unwrap() - 2.5).abs() < 1e-12);
    }

    #[test]
    fn gaussian_spectral_matches_squared_exponential() {
        let se = KernelSpec::squared_exponential(2.0).unwrap();
        let sp = KernelSpec::spectral(SpectralDensity::SQUARED_EXPONENTIAL, 2.0).unwrap();
        let a = kernel_eval(&se, &[0.1], &[0.4]).unwrap();
        let b = kernel_eval(&sp, &[0.1], &[0.4]).unwrap();
        assert!((a - b).abs() < 1e-6);
    }

    #[test]
    fn adaptive_route_agrees_for_gaussian() {
        let sp = KernelSpec::spectral(SpectralDensity::SQUARED_EXPONENTIAL, 1.5).unwrap();
        for lag in [0.0, 0.2, 0.55, 1.0] {
            let exact = (-(1.5f64 * lag).powi(2)).exp();
            assert!((spectral_covariance_adaptive(&sp, &[lag]).unwrap() - exact).abs() < 1e-8);
        }
        let exact = (-(1.5f64).powi(2) * (0.3f64 * 0.3 + 0.4 * 0.4)).exp();
        assert!((spectral_covariance_adaptive(&sp, &[0.3, 0.4]).unwrap() - exact).abs() < 1e-7);
    }

    #[test]
    fn cauchy_adaptive_quadrature_reports_nonconvergence() {
        let k = KernelSpec::spectral(SpectralDensity::Cauchy { scale: 1.0, mass: 1.0 }, 1.0).unwrap();
        assert!(matches!(
            spectral_covariance_quadrature(&k, &[0.3]),
            Err(Error::NonConvergent(_))
        ));
    }

    #[test]
    fn exponential_moment_gaussian_and_cauchy() {
        let unit = KernelSpec::spectral(SpectralDensity::Gaussian { variance: 1.0, mass: 1.0 }, 1.0).unwrap();
        // e^{1/2} (1 + erf(1/sqrt 2)), evaluated with mpmath.
        match check_exponential_moment(&unit, 1) {
            ExponentialMoment::Finite(v) => assert!((v - 2.774_285_957_670_009_6).abs() < 1e-9),
            ExponentialMoment::Diverged => panic!("gaussian moment diverged"),
        }
        let se = KernelSpec::squared_exponential(1.0).unwrap();
        match check_exponential_moment(&se, 2) {
            ExponentialMoment::Finite(v) => assert!((v - 9.878_186_033_256_132).abs() < 1e-8),
            ExponentialMoment::Diverged => panic!("gaussian moment diverged"),
        }
        let cauchy = KernelSpec::spectral(SpectralDensity::Cauchy { scale: 1.0, mass: 1.0 }, 1.0).unwrap();
        assert_eq!(check_exponential_moment(&cauchy, 1), ExponentialMoment::Diverged);
        assert_eq!(check_exponential_moment(&cauchy, 2), ExponentialMoment::Diverged);
        let tiny = KernelSpec::new(cauchy.family, 1.0, 1e-3).unwrap();
        assert_eq!(check_exponential_moment(&tiny, 1), ExponentialMoment::Diverged);
    }

    #[test]
    fn covariance_matrix_matches_pairwise_eval() {
        let grid = Grid::new(2, 5).unwrap();
        let k = KernelSpec::squared_exponential(1.7).unwrap();
        let cov = covariance_matrix(&k, &grid).unwrap();
        for a in 0..grid.node_count() {
            for b in 0..grid.node_count() {
                let direct = kernel_eval(&k, &grid.node(a), &grid.node(b)).unwrap();
                assert!((cov[(a, b)] - direct).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn factor_roundtrip_and_guard() {
        let grid = Grid::new(1, 40).unwrap();
        let f = CovarianceFactor::for_grid(&KernelSpec::squared_exponential(0.8).unwrap(), &grid).unwrap();
        assert!(f.jitter() >= 1e-10);
        let w: Vec<f64> = (0..40).map(|i| (i as f64 * 0.37).sin()).collect();
        let back = f.whiten(&f.apply(&w));
        let err = w.iter().zip(&back).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        assert!(err < 1e-6, "{err}");
        let big = Grid::new(2, 65).unwrap();
        assert!(matches!(
            covariance_matrix(&KernelSpec::squared_exponential(1.0).unwrap(), &big),
            Err(Error::TooManyNodes { .. })
        ));
    }

    #[test]
    fn factorization_failure_is_reported() {
        let cov = DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, -1.0]);
        assert!(matches!(CovarianceFactor::factorize(cov), Err(Error::Factorization { .. })));
    }
}
