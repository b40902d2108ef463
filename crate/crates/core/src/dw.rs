//! The type-I discrete Weibull distribution on `{0, 1, 2, ...}`.
//!
//! `P(Y <= y) = 1 - q^((y+1)^beta)` for integer `y >= 0`, with `0 < q < 1` and
//! `beta > 0`. Geometric(q) is the special case `beta = 1`.
//!
//! Everything is evaluated through `ln q` so that values of `q` extremely
//! close to one (as produced by saturating link functions) keep full
//! precision.

use std::collections::BTreeMap;
use std::f64::consts::LN_2;

use rand::Rng;

use crate::error::{Error, Result};
use crate::numeric::log1mexp;
use crate::optim::NelderMead;

/// Largest value returned by [`DwParams::quantile`]; beyond this integers are
/// no longer exactly representable as `f64`.
pub const MAX_QUANTILE: u64 = 1 << 53;

/// Parameters `(q, beta)` of one discrete Weibull distribution.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DwParams {
    q: f64,
    log_q: f64,
    beta: f64,
}

impl DwParams {
    pub fn new(q: f64, beta: f64) -> Result<Self> {
        if !(q > 0.0 && q < 1.0) {
            return Err(Error::InvalidParameter {
                name: "q",
                value: q,
                reason: "must lie strictly inside (0, 1)",
            });
        }
        Self::checked(q, q.ln(), beta)
    }

    /// Builds the distribution from `ln q`, which must be negative and finite.
    pub fn from_log_q(log_q: f64, beta: f64) -> Result<Self> {
        if !(log_q < 0.0 && log_q.is_finite()) {
            return Err(Error::InvalidParameter {
                name: "log_q",
                value: log_q,
                reason: "must be finite and negative",
            });
        }
        Self::checked(log_q.exp(), log_q, beta)
    }

    fn checked(q: f64, log_q: f64, beta: f64) -> Result<Self> {
        if !(beta > 0.0 && beta.is_finite()) {
            return Err(Error::InvalidParameter {
                name: "beta",
                value: beta,
                reason: "must be finite and positive",
            });
        }
        Ok(Self { q, log_q, beta })
    }

    /// Unchecked constructor for hot loops whose inputs are already clamped.
    pub(crate) fn from_log_q_unchecked(log_q: f64, beta: f64) -> Self {
        Self {
            q: log_q.exp(),
            log_q,
            beta,
        }
    }

    pub fn q(&self) -> f64 {
        self.q
    }

    pub fn log_q(&self) -> f64 {
        self.log_q
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    /// Returns `(y^beta, (y+1)^beta - y^beta)`; the increment is formed
    /// without cancellation for large `y`.
    fn exponents(&self, y: u64) -> (f64, f64) {
        if y == 0 {
            return (0.0, 1.0);
        }
        let yf = y as f64;
        let a = yf.powf(self.beta);
        let d = a * (self.beta * (1.0 / yf).ln_1p()).exp_m1();
        (a, d)
    }

    /// `P(Y = y) = q^(y^beta) - q^((y+1)^beta)`.
    pub fn pmf(&self, y: u64) -> f64 {
        let (a, d) = self.exponents(y);
        (a * self.log_q).exp() * -(d * self.log_q).exp_m1()
    }

    /// `ln P(Y = y)`, finite even where the pmf underflows.
    pub fn ln_pmf(&self, y: u64) -> f64 {
        let (a, d) = self.exponents(y);
        a * self.log_q + log1mexp(-d * self.log_q)
    }

    /// `P(Y <= y)`; zero for negative `y`.
    pub fn cdf(&self, y: i64) -> f64 {
        if y < 0 {
            return 0.0;
        }
        let e = ((y as f64) + 1.0).powf(self.beta);
        -(e * self.log_q).exp_m1()
    }

    /// `P(Y > y) = q^((y+1)^beta)`.
    pub fn sf(&self, y: i64) -> f64 {
        if y < 0 {
            return 1.0;
        }
        (((y as f64) + 1.0).powf(self.beta) * self.log_q).exp()
    }

    /// Smallest `y` with `cdf(y) >= p`.
    ///
    /// Uses `ceil((ln(1-p)/ln q)^(1/beta) - 1)` followed by a single-step
    /// correction against [`cdf`](Self::cdf). Saturates at [`MAX_QUANTILE`].
    pub fn quantile(&self, p: f64) -> Result<u64> {
        if !(0.0..1.0).contains(&p) {
            return Err(Error::InvalidParameter {
                name: "p",
                value: p,
                reason: "quantile requires 0 <= p < 1",
            });
        }
        if p == 0.0 {
            return Ok(0);
        }
        let t = (-p).ln_1p() / self.log_q;
        let raw = (t.powf(1.0 / self.beta) - 1.0).ceil();
        if !(raw < MAX_QUANTILE as f64) {
            return Ok(MAX_QUANTILE);
        }
        let mut y = raw.max(0.0) as u64;
        if self.cdf(y as i64) < p {
            y += 1;
        } else if y > 0 && self.cdf(y as i64 - 1) >= p {
            y -= 1;
        }
        Ok(y)
    }

    /// Inverse-transform sampling: `quantile(u)` for `u ~ U[0, 1)`.
    pub fn sample<R: Rng + ?Sized>(&self, n: usize, rng: &mut R) -> Vec<u64> {
        (0..n).map(|_| self.draw(rng)).collect()
    }

    pub fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> u64 {
        let u: f64 = rng.random();
        self.quantile(u).expect("u lies in [0, 1)")
    }

    /// Mean by truncated summation of the survival function,
    /// `E[Y] = sum_{y >= 0} q^((y+1)^beta)`.
    ///
    /// Stops once the tail term drops below `1e-12` of the running sum or
    /// after `10^7` terms, in which case the truncated value is returned.
    pub fn mean(&self) -> f64 {
        let mut total = 0.0;
        for y in 0..10_000_000i64 {
            let term = self.sf(y);
            total += term;
            if term <= 1e-12 * total.max(1e-300) {
                break;
            }
        }
        total
    }
}

/// Sufficient summaries of a count sample for the closed-form estimators.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleCounts {
    pub n: usize,
    /// Number of zeros.
    pub zeros: usize,
    /// Number of ones.
    pub ones: usize,
    pub max_value: u64,
    /// Empirical cdf evaluated at each distinct observed value.
    pub ecdf: BTreeMap<u64, f64>,
}

impl SampleCounts {
    /// Empirical cdf at an arbitrary point (right-continuous step function).
    pub fn ecdf_at(&self, d: u64) -> f64 {
        self.ecdf.range(..=d).next_back().map_or(0.0, |(_, &f)| f)
    }
}

pub fn summarize_sample(values: &[u64]) -> Result<SampleCounts> {
    if values.is_empty() {
        return Err(Error::EmptyInput);
    }
    let mut counts: BTreeMap<u64, usize> = BTreeMap::new();
    for &v in values {
        *counts.entry(v).or_default() += 1;
    }
    let n = values.len();
    let mut running = 0usize;
    let ecdf = counts
        .iter()
        .map(|(&v, &c)| {
            running += c;
            (v, running as f64 / n as f64)
        })
        .collect();
    Ok(SampleCounts {
        n,
        zeros: counts.get(&0).copied().unwrap_or(0),
        ones: counts.get(&1).copied().unwrap_or(0),
        max_value: *counts.keys().next_back().expect("non-empty"),
        ecdf,
    })
}

fn proportion_q(sc: &SampleCounts) -> Result<f64> {
    if sc.zeros == 0 || sc.zeros == sc.n {
        return Err(Error::QDegenerate {
            zeros: sc.zeros,
            n: sc.n,
        });
    }
    Ok(1.0 - sc.zeros as f64 / sc.n as f64)
}

/// One term of the proportions-type shape estimator at support point `d`.
fn shape_term(ecdf_d: f64, q_hat: f64, d: u64) -> f64 {
    ((1.0 - ecdf_d).ln() / q_hat.ln()).ln() / ((d + 1) as f64).ln()
}

/// Method of proportions: `q = 1 - Z/n` and
/// `beta = ln[ln(1 - Z/n - U/n) / ln(1 - Z/n)] / ln 2`.
pub fn estimate_proportions(sc: &SampleCounts) -> Result<DwParams> {
    let q_hat = proportion_q(sc)?;
    if sc.zeros + sc.ones >= sc.n || sc.ones == 0 {
        return Err(Error::BetaUndefined);
    }
    let f1 = (sc.zeros + sc.ones) as f64 / sc.n as f64;
    let beta = shape_term(f1, q_hat, 1);
    DwParams::new(q_hat, beta)
}

/// Shape estimator averaging the proportions term over every support point
/// `d = 1..=max_value-1`. Terms that are not finite (empirical cdf equal to
/// one, or a non-positive log ratio) are dropped from the average.
pub fn estimate_santos_beta(sc: &SampleCounts, q_hat: f64) -> Result<f64> {
    if sc.max_value < 2 {
        return Err(Error::InsufficientRange {
            max_value: sc.max_value,
        });
    }
    if !(q_hat > 0.0 && q_hat < 1.0) {
        return Err(Error::InvalidParameter {
            name: "q_hat",
            value: q_hat,
            reason: "must lie strictly inside (0, 1)",
        });
    }
    let k = sc.max_value - 1;
    let terms: Vec<f64> = (1..=k)
        .map(|d| shape_term(sc.ecdf_at(d), q_hat, d))
        .filter(|t| t.is_finite())
        .collect();
    if terms.is_empty() {
        return Err(Error::BetaUndefined);
    }
    Ok(terms.iter().sum::<f64>() / terms.len() as f64)
}

/// Result of a single-sample maximum-likelihood fit.
#[derive(Debug, Clone)]
pub struct SingleMle {
    pub params: DwParams,
    pub log_likelihood: f64,
    pub converged: bool,
    pub evaluations: usize,
}

/// Log-likelihood of a sample given as `(value, weight)` pairs.
pub fn weighted_log_likelihood(params: &DwParams, counts: &[(u64, f64)]) -> f64 {
    counts.iter().map(|&(y, w)| w * params.ln_pmf(y)).sum()
}

/// Maximum-likelihood fit of a single i.i.d. sample.
pub fn mle_single(values: &[u64]) -> Result<SingleMle> {
    let sc = summarize_sample(values)?;
    let mut counts: BTreeMap<u64, f64> = BTreeMap::new();
    for &v in values {
        *counts.entry(v).or_default() += 1.0;
    }
    let counts: Vec<(u64, f64)> = counts.into_iter().collect();
    let start = starting_point(&sc);
    mle_weighted_from(&counts, start)
}

/// Maximum-likelihood fit for weighted observations `(value, weight)`.
pub fn mle_weighted(counts: &[(u64, f64)]) -> Result<SingleMle> {
    let total: f64 = counts.iter().map(|c| c.1).sum();
    if counts.is_empty() || !(total > 0.0) {
        return Err(Error::EmptyInput);
    }
    let w0: f64 = counts.iter().filter(|c| c.0 == 0).map(|c| c.1).sum();
    let w1: f64 = counts.iter().filter(|c| c.0 == 1).map(|c| c.1).sum();
    let q0 = 1.0 - w0 / total;
    let b0 = (((1.0 - (w0 + w1) / total).ln() / q0.ln()).ln() / LN_2).max(0.0);
    let start = if q0 > 0.0 && q0 < 1.0 && b0 > 0.0 && b0.is_finite() {
        DwParams::new(q0, b0)?
    } else {
        DwParams::new(q0.clamp(0.05, 0.95), 1.0)?
    };
    mle_weighted_from(counts, start)
}

/// Method-of-proportions estimate when defined, else `(1 - Z/n` clamped to
/// `[0.05, 0.95], 1)`.
pub(crate) fn starting_point(sc: &SampleCounts) -> DwParams {
    estimate_proportions(sc).unwrap_or_else(|_| {
        let q = (1.0 - sc.zeros as f64 / sc.n as f64).clamp(0.05, 0.95);
        DwParams::new(q, 1.0).expect("clamped q is valid")
    })
}

fn mle_weighted_from(counts: &[(u64, f64)], start: DwParams) -> Result<SingleMle> {
    let distinct = counts.iter().filter(|c| c.1 > 0.0).count();
    if distinct < 2 {
        return Err(Error::DegenerateSample);
    }
    // (logit q, ln beta)
    let to_params = |x: &[f64]| -> Option<DwParams> {
        let log_q = -crate::numeric::softplus(-x[0]);
        DwParams::from_log_q(log_q, x[1].exp()).ok()
    };
    let objective = |x: &[f64]| match to_params(x) {
        Some(p) => -weighted_log_likelihood(&p, counts),
        None => f64::INFINITY,
    };
    let x0 = [
        (start.q() / (1.0 - start.q())).ln(),
        start.beta().ln(),
    ];
    let nm = NelderMead {
        tol: 1e-8,
        max_evals: 2000,
        ..Default::default()
    };
    let m = nm.minimize(objective, &x0);
    let params = to_params(&m.x).ok_or_else(|| Error::Numerical("MLE left the valid region".into()))?;
    Ok(SingleMle {
        params,
        log_likelihood: -m.value,
        converged: m.converged,
        evaluations: m.evals,
    })
}
