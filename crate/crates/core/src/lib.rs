//! Discrete Weibull regression for count data.
//!
//! The crate is organised bottom-up:
//!
//! * [`dw`] – the type-I discrete Weibull distribution and its classical
//!   single-sample estimators.
//! * [`regression`] – link functions, the conditional likelihood and
//!   maximum-likelihood fitting; [`baseline`] adds Poisson and negative
//!   binomial GLMs for comparison.
//! * [`priors`], [`mcmc`] and [`posterior`] – Bayesian inference with flat or
//!   Laplace shrinkage priors, random-walk Metropolis-Hastings and posterior
//!   summaries (HPD intervals, marginal modes, variable selection).
//! * [`criteria`] – AIC/BIC/CAIC/QIC/DIC/BPIC and the log prior predictive
//!   density.
//! * [`simulation`] – data generators for the simulation experiments.

pub mod baseline;
pub mod criteria;
pub mod dw;
pub mod error;
pub mod mcmc;
pub mod optim;
pub mod posterior;
pub mod priors;
pub mod regression;
pub mod simulation;

mod numeric;

pub use dw::{DwParams, SampleCounts};
pub use error::{Error, Result};
pub use regression::{Dataset, ModelSpec, QLink, RegressionParams};

/// Deterministic, platform-independent generator used throughout the crate.
pub type SeededRng = rand_chacha::ChaCha8Rng;

/// Builds the crate's standard generator from an integer seed.
pub fn seeded_rng(seed: u64) -> SeededRng {
    use rand::SeedableRng;
    SeededRng::seed_from_u64(seed)
}
