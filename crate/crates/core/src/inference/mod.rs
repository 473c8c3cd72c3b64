//! Posterior sampling for the full hierarchy on a grid.
//!
//! The latent field is whitened, `g = L(ell) w` with `w ~ N(0, I)`, so the
//! latent prior does not move when `ell` does. Each sweep performs an
//! elliptical slice update of `w` followed by random-walk Metropolis moves
//! on `log ell` and `log lambda_star`.

mod geweke;
mod mcmc;
mod model;

pub use geweke::{geweke_joint_test, GewekeConfig, GewekeReport, GewekeStatistic};
pub use mcmc::{
    run_chain, AcceptanceRates, ChainConfig, HyperOutcome, LatentOutcome, PosteriorChain, Sampler,
};
pub use model::{log_unnormalized_posterior, Dataset, LikelihoodForm, Model, ModelState};
