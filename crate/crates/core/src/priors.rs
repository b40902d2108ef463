//! Flat and Laplace (Bayesian lasso) priors on the regression coefficients.
//!
//! Under the Laplace prior each penalised coordinate of `theta` has density
//! `(lambda/2) exp(-lambda |theta_j|)` and likewise for `gamma` with rate
//! `tau`. Both rates carry a `Gamma(a, b)` hyper-prior in the shape/rate
//! parameterisation, so their full conditionals are again Gamma.

use rand::Rng;
use rand_distr::{Distribution, Gamma};
use serde::{Deserialize, Serialize};
use statrs::function::gamma::ln_gamma;

use crate::error::{Error, Result};
use crate::regression::{self, Dataset, ModelSpec, RegressionParams};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PriorKind {
    Flat,
    Laplace,
}

impl std::str::FromStr for PriorKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "flat" => Ok(PriorKind::Flat),
            "laplace" => Ok(PriorKind::Laplace),
            other => Err(Error::InvalidConfig(format!("unknown prior `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PriorSpec {
    pub kind: PriorKind,
    /// Gamma shape `a` of the hyper-prior on `lambda` and `tau`.
    pub hyper_a: f64,
    /// Gamma rate `b`.
    pub hyper_b: f64,
    pub penalize_intercepts: bool,
}

impl PriorSpec {
    pub fn flat() -> Self {
        Self {
            kind: PriorKind::Flat,
            hyper_a: 1.0,
            hyper_b: 1.0,
            penalize_intercepts: false,
        }
    }

    pub fn laplace(hyper_a: f64, hyper_b: f64) -> Self {
        Self {
            kind: PriorKind::Laplace,
            hyper_a,
            hyper_b,
            penalize_intercepts: false,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.kind == PriorKind::Laplace
            && !(self.hyper_a > 0.0 && self.hyper_b > 0.0 && self.hyper_a.is_finite() && self.hyper_b.is_finite())
        {
            return Err(Error::InvalidConfig(format!(
                "laplace prior needs positive hyper-parameters, got a={}, b={}",
                self.hyper_a, self.hyper_b
            )));
        }
        Ok(())
    }

    /// Prior mean `a / b` of the shrinkage rates.
    pub fn hyper_mean(&self) -> HyperState {
        let m = self.hyper_a / self.hyper_b;
        HyperState { lambda: m, tau: m }
    }

    fn first_penalized(&self) -> usize {
        if self.penalize_intercepts {
            0
        } else {
            1
        }
    }

    pub fn penalized_theta<'a>(&self, params: &'a RegressionParams) -> &'a [f64] {
        penalized(&params.theta, self.first_penalized())
    }

    pub fn penalized_gamma<'a>(&self, params: &'a RegressionParams) -> &'a [f64] {
        penalized(&params.gamma, self.first_penalized())
    }
}

fn penalized(v: &[f64], from: usize) -> &[f64] {
    v.get(from..).unwrap_or(&[])
}

/// Shrinkage rates: `lambda` for `theta`, `tau` for `gamma`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HyperState {
    pub lambda: f64,
    pub tau: f64,
}

fn laplace_block(coeffs: &[f64], rate: f64) -> f64 {
    let m = coeffs.len() as f64;
    m * (rate / 2.0).ln() - rate * coeffs.iter().map(|c| c.abs()).sum::<f64>()
}

/// `ln p(theta | lambda) + ln p(gamma | tau)`; zero for the flat prior.
pub fn log_prior(params: &RegressionParams, hyper: &HyperState, spec: &PriorSpec) -> f64 {
    match spec.kind {
        PriorKind::Flat => 0.0,
        PriorKind::Laplace => {
            laplace_block(spec.penalized_theta(params), hyper.lambda)
                + laplace_block(spec.penalized_gamma(params), hyper.tau)
        }
    }
}

/// `ln Gamma(x; shape a, rate b)`.
pub fn gamma_log_density(x: f64, a: f64, b: f64) -> f64 {
    if x <= 0.0 {
        return f64::NEG_INFINITY;
    }
    a * b.ln() - ln_gamma(a) + (a - 1.0) * x.ln() - b * x
}

/// Log of the hyper-prior density of `(lambda, tau)`; zero for flat priors.
pub fn log_hyper_prior(hyper: &HyperState, spec: &PriorSpec) -> f64 {
    match spec.kind {
        PriorKind::Flat => 0.0,
        PriorKind::Laplace => {
            gamma_log_density(hyper.lambda, spec.hyper_a, spec.hyper_b)
                + gamma_log_density(hyper.tau, spec.hyper_a, spec.hyper_b)
        }
    }
}

/// Unnormalised joint log-posterior of coefficients and shrinkage rates.
pub fn log_posterior_unnorm(
    params: &RegressionParams,
    hyper: &HyperState,
    data: &Dataset,
    model: &ModelSpec,
    prior: &PriorSpec,
) -> f64 {
    regression::log_likelihood(data, params, model)
        + log_prior(params, hyper, prior)
        + log_hyper_prior(hyper, prior)
}

/// Exact draw from the full conditional of a Laplace rate:
/// `Gamma(a + m, b + sum |c_j|)` over the `m` penalised coordinates.
pub fn gibbs_update_rate<R: Rng + ?Sized>(coeffs: &[f64], a: f64, b: f64, rng: &mut R) -> f64 {
    let shape = a + coeffs.len() as f64;
    let rate = b + coeffs.iter().map(|c| c.abs()).sum::<f64>();
    Gamma::new(shape, 1.0 / rate)
        .expect("shape and rate are positive")
        .sample(rng)
        .max(f64::MIN_POSITIVE)
}
