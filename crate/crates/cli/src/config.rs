//! Harness configuration: a TOML file with typed sections over built-in
//! defaults, then command-line overrides.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use sgcp::experiment::{ExperimentConfig, TruthSpec};
use sgcp::inference::{ChainConfig, GewekeConfig, LikelihoodForm, Model};
use sgcp::prior::{
    GammaPrior, LengthScalePrior, LengthScaleTail, MaxIntensityPrior, MaxIntensityTail, ProbeRange, SgcpPrior,
};
use sgcp::{Grid, KernelFamily, KernelSpec, LinkFunction, SpectralDensity};

use crate::error::{CliError, CliResult};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct HarnessConfig {
    pub seed: u64,
    pub output_dir: PathBuf,
    pub grid: GridSection,
    pub kernel: KernelSection,
    pub link: LinkSection,
    pub hyperpriors: HyperpriorSection,
    pub chain: ChainSection,
    pub experiment: ExperimentSection,
    pub simulate: SimulateSection,
    pub calibrate: CalibrateSection,
    pub verify: VerifySection,
}

impl Default for HarnessConfig {
    fn default() -> Self {
        Self {
            seed: 20_150_302,
            output_dir: PathBuf::from("sgcp-out"),
            grid: GridSection::default(),
            kernel: KernelSection::default(),
            link: LinkSection::default(),
            hyperpriors: HyperpriorSection::default(),
            chain: ChainSection::default(),
            experiment: ExperimentSection::default(),
            simulate: SimulateSection::default(),
            calibrate: CalibrateSection::default(),
            verify: VerifySection::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GridSection {
    pub dim: usize,
    /// Nodes per axis; zero selects 64 for one dimension and 32 otherwise.
    pub resolution: usize,
}

impl Default for GridSection {
    fn default() -> Self {
        Self { dim: 1, resolution: 0 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum KernelName {
    SquaredExponential,
    SpectralGaussian,
    SpectralCauchy,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct KernelSection {
    pub family: KernelName,
    pub delta: f64,
    pub spectral_variance: f64,
    pub spectral_mass: f64,
    pub cauchy_scale: f64,
}

impl Default for KernelSection {
    fn default() -> Self {
        Self {
            family: KernelName::SquaredExponential,
            delta: 1.0,
            spectral_variance: 2.0,
            spectral_mass: 1.0,
            cauchy_scale: 1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LinkSection {
    pub name: LinkFunction,
}

impl Default for LinkSection {
    fn default() -> Self {
        Self { name: LinkFunction::Logistic }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct HyperpriorSection {
    pub ell_shape: f64,
    pub ell_rate: f64,
    pub lambda_shape: f64,
    pub lambda_rate: f64,
    /// Overrides for the length-scale tail constants; derived from the
    /// gamma parameters when absent.
    pub ell_tail: Option<LengthScaleTail>,
    pub lambda_tail: Option<MaxIntensityTail>,
}

impl Default for HyperpriorSection {
    fn default() -> Self {
        Self { ell_shape: 2.0, ell_rate: 1.0, lambda_shape: 2.0, lambda_rate: 0.2, ell_tail: None, lambda_tail: None }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ChainSection {
    pub iterations: usize,
    pub burn_in: usize,
    pub thin: usize,
    pub step_ell: f64,
    pub step_lambda: f64,
    pub adapt: bool,
    pub checkpoint_every: usize,
}

impl Default for ChainSection {
    fn default() -> Self {
        let c = ChainConfig::default();
        Self {
            iterations: c.iterations,
            burn_in: c.burn_in,
            thin: c.thin,
            step_ell: c.rw_step_ell,
            step_lambda: c.rw_step_lambda,
            adapt: c.adapt,
            checkpoint_every: c.checkpoint_every,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentSection {
    pub truth: String,
    pub n_list: Vec<usize>,
    pub replicates: usize,
    pub radius_constant: f64,
    /// `[low, high]`; `bench` fails when the fitted slope leaves it.
    pub slope_band: [f64; 2],
    /// Inject distances `synthetic_scale * n^synthetic_exponent` instead of
    /// running chains.
    pub synthetic: bool,
    pub synthetic_scale: f64,
    pub synthetic_exponent: f64,
}

impl Default for ExperimentSection {
    fn default() -> Self {
        let e = ExperimentConfig::default();
        Self {
            truth: "sine".into(),
            n_list: e.n_list,
            replicates: e.replicates,
            radius_constant: e.radius_constant,
            slope_band: [-0.55, -0.25],
            synthetic: false,
            synthetic_scale: 1.0,
            synthetic_exponent: -0.4,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimulateSection {
    pub n: usize,
}

impl Default for SimulateSection {
    fn default() -> Self {
        Self { n: 10 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CalibrateSection {
    pub rounds: usize,
    pub patterns: usize,
    pub resolution: usize,
    pub step_ell: f64,
    pub step_lambda: f64,
    pub batches: usize,
    pub threshold: f64,
    pub mutation: LikelihoodForm,
}

impl Default for CalibrateSection {
    fn default() -> Self {
        let g = GewekeConfig::default();
        Self {
            rounds: g.rounds,
            patterns: g.patterns,
            resolution: 8,
            step_ell: g.rw_step_ell,
            step_lambda: g.rw_step_lambda,
            batches: g.batches,
            threshold: g.threshold,
            mutation: LikelihoodForm::Standard,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct VerifySection {
    pub probe_start: f64,
    pub probe_end: f64,
    pub probe_points: usize,
}

impl Default for VerifySection {
    fn default() -> Self {
        let p = ProbeRange::default();
        Self { probe_start: p.start, probe_end: p.end, probe_points: p.points }
    }
}

/// Command-line values that take precedence over the file.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
    pub n: Option<usize>,
}

impl HarnessConfig {
    pub fn from_toml(text: &str) -> CliResult<Self> {
        toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))
    }

    pub fn load(path: Option<&Path>, overrides: &Overrides) -> CliResult<Self> {
        let mut cfg = match path {
            Some(p) => {
                let text = std::fs::read_to_string(p).map_err(CliError::io(p))?;
                Self::from_toml(&text)?
            }
            None => Self::default(),
        };
        if let Some(seed) = overrides.seed {
            cfg.seed = seed;
        }
        if let Some(out) = &overrides.out {
            cfg.output_dir = out.clone();
        }
        if let Some(n) = overrides.n {
            cfg.simulate.n = n;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> CliResult<()> {
        self.grid()?;
        self.prior()?;
        self.truth()?;
        self.chain_config(0).validate()?;
        self.experiment_config(0).validate()?;
        if self.experiment.slope_band[0] > self.experiment.slope_band[1] {
            return Err(CliError::Config("slope_band must be [low, high]".into()));
        }
        Ok(())
    }

    /// SHA-256 of the resolved configuration, output directory excluded.
    pub fn hash(&self) -> String {
        let mut canonical = self.clone();
        canonical.output_dir = PathBuf::new();
        let json = serde_json::to_string(&canonical).expect("config serializes");
        hex::encode(Sha256::digest(json.as_bytes()))
    }

    pub fn grid(&self) -> CliResult<Grid> {
        let g = if self.grid.resolution == 0 {
            Grid::with_default_resolution(self.grid.dim)
        } else {
            Grid::new(self.grid.dim, self.grid.resolution)
        };
        Ok(g?)
    }

    pub fn kernel(&self) -> CliResult<KernelSpec> {
        let k = &self.kernel;
        let family = match k.family {
            KernelName::SquaredExponential => KernelFamily::SquaredExponential,
            KernelName::SpectralGaussian => KernelFamily::Spectral {
                density: SpectralDensity::Gaussian { variance: k.spectral_variance, mass: k.spectral_mass },
            },
            KernelName::SpectralCauchy => KernelFamily::Spectral {
                density: SpectralDensity::Cauchy { scale: k.cauchy_scale, mass: k.spectral_mass },
            },
        };
        Ok(KernelSpec::new(family, 1.0, k.delta)?)
    }

    pub fn prior(&self) -> CliResult<SgcpPrior> {
        let h = &self.hyperpriors;
        let mut length_scale = LengthScalePrior::new(GammaPrior::new(h.ell_shape, h.ell_rate)?, self.grid.dim)?;
        if let Some(t) = h.ell_tail {
            length_scale = length_scale.with_tail(t);
        }
        let mut max_intensity = MaxIntensityPrior::new(GammaPrior::new(h.lambda_shape, h.lambda_rate)?);
        if let Some(t) = h.lambda_tail {
            max_intensity = max_intensity.with_tail(t);
        }
        Ok(SgcpPrior { kernel: self.kernel()?, link: self.link.name, length_scale, max_intensity })
    }

    pub fn model(&self) -> CliResult<Model> {
        Ok(Model::new(self.prior()?, self.grid()?)?)
    }

    pub fn truth(&self) -> CliResult<TruthSpec> {
        TruthSpec::by_name(&self.experiment.truth).map_err(|e| CliError::Config(e.to_string()))
    }

    pub fn chain_config(&self, seed: u64) -> ChainConfig {
        let c = &self.chain;
        ChainConfig {
            iterations: c.iterations,
            burn_in: c.burn_in,
            thin: c.thin,
            rw_step_ell: c.step_ell,
            rw_step_lambda: c.step_lambda,
            adapt: c.adapt,
            update_hyper: true,
            checkpoint_every: c.checkpoint_every,
            seed,
        }
    }

    pub fn experiment_config(&self, seed: u64) -> ExperimentConfig {
        let e = &self.experiment;
        ExperimentConfig {
            n_list: e.n_list.clone(),
            replicates: e.replicates,
            radius_constant: e.radius_constant,
            chain: self.chain_config(0),
            seed,
        }
    }

    pub fn geweke_config(&self) -> GewekeConfig {
        let c = &self.calibrate;
        GewekeConfig {
            rounds: c.rounds,
            patterns: c.patterns,
            rw_step_ell: c.step_ell,
            rw_step_lambda: c.step_lambda,
            batches: c.batches,
            threshold: c.threshold,
            ..GewekeConfig::default()
        }
    }

    pub fn probe_range(&self) -> ProbeRange {
        ProbeRange { start: self.verify.probe_start, end: self.verify.probe_end, points: self.verify.probe_points }
    }
}
