//! Bayesian learning of inhomogeneous Poisson process intensities with the
//! sigmoidal Gaussian Cox process prior `lambda = lambda_star * sigma(g)`.
//!
//! * [`point_process`]: point patterns, gridded intensities, thinning
//!   simulation and the Poisson likelihood.
//! * [`kernel`]: spectral-form stationary kernels and exact GP sampling.
//! * [`prior`]: link functions, hyperpriors, tail validators and the
//!   small-ball prior mass probe.
//! * [`inference`]: grid-discretized MCMC for the full hierarchy.
//! * [`metrics`]: the square-root L2 distance and posterior mass functionals.
//! * [`experiment`]: the posterior contraction-rate experiment.

pub mod error;
pub mod experiment;
pub mod grid;
pub mod inference;
pub mod kernel;
pub mod metrics;
pub mod point_process;
pub mod prior;
pub mod quadrature;
pub mod seed;
pub mod stats;

pub use error::{Error, Result};
pub use grid::Grid;
pub use inference::{run_chain, ChainConfig, Dataset, Model, ModelState, PosteriorChain};
pub use kernel::{KernelFamily, KernelSpec, SpectralDensity};
pub use point_process::{IntensityField, PointPattern};
pub use prior::{LinkFunction, SgcpPrior};
