//! Synthetic data generators: the six discrete Weibull regression
//! configurations, Poisson and NB2 misspecification data, the sparse
//! variable-selection design, and total variation distance.

use rand::seq::index::sample as sample_indices;
use rand::Rng;
use rand_distr::{Distribution, Gamma, Poisson};
use serde::{Deserialize, Serialize};
use statrs::function::gamma::ln_gamma;

use crate::error::{Error, Result};
use crate::regression::{self, Dataset, ModelSpec, QLink, RegressionParams};
use crate::{seeded_rng, SeededRng};

/// Covariates of the regression configurations are drawn from U(0, 1.5).
pub const COVARIATE_HIGH: f64 = 1.5;
pub const THETA: [f64; 3] = [0.4, -0.1, 0.34];
pub const GAMMA: [f64; 3] = [0.1, -0.15, 0.5];
pub const MISSPEC_ALPHA: [f64; 3] = [-0.5, 4.3, -2.2];
pub const NB_SIZE: f64 = 4.5;
/// Values of `x2` (with `x1 = 0.5`) at which misspecified fits are scored.
pub const ASSESSMENT_X2: [f64; 3] = [0.0, 0.35, 0.7];

fn logit(p: f64) -> f64 {
    (p / (1.0 - p)).ln()
}

fn uniform_rows(n: usize, highs: &[f64], rng: &mut SeededRng) -> Vec<Vec<f64>> {
    (0..n)
        .map(|_| highs.iter().map(|h| rng.random::<f64>() * h).collect())
        .collect()
}

fn names(p: usize) -> Vec<String> {
    (1..=p).map(|j| format!("x{j}")).collect()
}

/// The six generating configurations, numbered 1 to 6.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum RegressionCase {
    /// DW(q = 0.41, beta = 1.1), no covariates.
    Constant,
    /// q = 0.8, log beta regressed with `GAMMA`.
    FixedQRegBeta,
    /// logit q regressed with `THETA`, beta = 0.7.
    LogitRegQ,
    /// logit q with `THETA`, log beta with `GAMMA`.
    LogitRegQRegBeta,
    /// log(-log q) regressed with `THETA`, beta = 0.7.
    LogLogRegQ,
    /// log(-log q) with `THETA`, log beta with `GAMMA`.
    LogLogRegQRegBeta,
}

impl RegressionCase {
    pub const ALL: [RegressionCase; 6] = [
        Self::Constant,
        Self::FixedQRegBeta,
        Self::LogitRegQ,
        Self::LogitRegQRegBeta,
        Self::LogLogRegQ,
        Self::LogLogRegQRegBeta,
    ];

    pub fn from_index(i: usize) -> Result<Self> {
        Self::ALL
            .get(i.wrapping_sub(1))
            .copied()
            .ok_or_else(|| Error::InvalidConfig(format!("case must be 1..=6, got {i}")))
    }

    pub fn index(self) -> usize {
        Self::ALL.iter().position(|c| *c == self).unwrap() + 1
    }

    pub fn model(self) -> ModelSpec {
        match self {
            Self::Constant => ModelSpec::new(QLink::Logit, false, false),
            Self::FixedQRegBeta => ModelSpec::new(QLink::Logit, false, true),
            Self::LogitRegQ => ModelSpec::new(QLink::Logit, true, false),
            Self::LogitRegQRegBeta => ModelSpec::new(QLink::Logit, true, true),
            Self::LogLogRegQ => ModelSpec::new(QLink::LogLog, true, false),
            Self::LogLogRegQRegBeta => ModelSpec::new(QLink::LogLog, true, true),
        }
    }

    pub fn n_covariates(self) -> usize {
        if self == Self::Constant {
            0
        } else {
            2
        }
    }

    /// True coefficients on the link scale.
    pub fn params(self) -> RegressionParams {
        let model = self.model();
        let theta = if model.q_regressed {
            THETA.to_vec()
        } else {
            let q: f64 = if self == Self::Constant { 0.41 } else { 0.8 };
            vec![model.q_link.linpred_from_q(q)]
        };
        let gamma = if model.beta_regressed {
            GAMMA.to_vec()
        } else {
            let beta: f64 = if self == Self::Constant { 1.1 } else { 0.7 };
            vec![beta.ln()]
        };
        RegressionParams { theta, gamma }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DwTruth {
    pub case: usize,
    pub model: ModelSpec,
    pub params: RegressionParams,
}

/// Draws `n` observations from one of the six configurations.
pub fn gen_dw_regression(case: RegressionCase, n: usize, seed: u64) -> Result<(Dataset, DwTruth)> {
    if n == 0 {
        return Err(Error::EmptyInput);
    }
    let mut rng = seeded_rng(seed);
    let p = case.n_covariates();
    let rows = uniform_rows(n, &vec![COVARIATE_HIGH; p], &mut rng);
    let model = case.model();
    let params = case.params();
    let mut y = Vec::with_capacity(n);
    for r in &rows {
        let mut x = vec![1.0];
        x.extend(r);
        y.push(regression::conditional_params(&x, &params, &model)?.draw(&mut rng));
    }
    let data = Dataset::from_covariates(y, &rows, &names(p))?;
    Ok((
        data,
        DwTruth {
            case: case.index(),
            model,
            params,
        },
    ))
}

/// True conditional law of the misspecification experiments.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "lowercase")]
pub enum CountOracle {
    Poisson { alpha: [f64; 3] },
    NegBin { alpha: [f64; 3], size: f64 },
}

impl CountOracle {
    /// `exp(x alpha)` for a design row `x = (1, x1, x2)`.
    pub fn mean(&self, x: &[f64]) -> f64 {
        let alpha = match self {
            Self::Poisson { alpha } | Self::NegBin { alpha, .. } => alpha,
        };
        x.iter().zip(alpha).map(|(a, b)| a * b).sum::<f64>().exp()
    }

    pub fn pmf(&self, x: &[f64], y: u64) -> f64 {
        let mu = self.mean(x);
        let yf = y as f64;
        let ln = match *self {
            Self::Poisson { .. } => yf * mu.ln() - mu - ln_gamma(yf + 1.0),
            Self::NegBin { size, .. } => {
                ln_gamma(yf + size) - ln_gamma(size) - ln_gamma(yf + 1.0)
                    + size * (size / (size + mu)).ln()
                    + yf * (mu / (size + mu)).ln()
            }
        };
        ln.exp()
    }

    fn draw(&self, x: &[f64], rng: &mut SeededRng) -> u64 {
        let mu = self.mean(x);
        let rate = match *self {
            Self::Poisson { .. } => mu,
            Self::NegBin { size, .. } => Gamma::new(size, mu / size)
                .expect("positive shape and scale")
                .sample(rng),
        };
        if rate <= 0.0 {
            return 0;
        }
        Poisson::new(rate).expect("positive rate").sample(rng) as u64
    }
}

fn gen_misspec(n: usize, seed: u64, oracle: CountOracle) -> Result<(Dataset, CountOracle)> {
    if n == 0 {
        return Err(Error::EmptyInput);
    }
    let mut rng = seeded_rng(seed);
    let rows = uniform_rows(n, &[1.0, COVARIATE_HIGH], &mut rng);
    let y = rows
        .iter()
        .map(|r| oracle.draw(&[1.0, r[0], r[1]], &mut rng))
        .collect();
    Ok((Dataset::from_covariates(y, &rows, &names(2))?, oracle))
}

/// Poisson responses with mean `exp(-0.5 + 4.3 x1 - 2.2 x2)`,
/// `x1 ~ U(0, 1)`, `x2 ~ U(0, 1.5)`.
pub fn gen_poisson_misspec(n: usize, seed: u64) -> Result<(Dataset, CountOracle)> {
    gen_misspec(n, seed, CountOracle::Poisson { alpha: MISSPEC_ALPHA })
}

/// NB2 responses with the same mean and size 4.5, sampled as a
/// Gamma-Poisson mixture.
pub fn gen_nb_misspec(n: usize, seed: u64) -> Result<(Dataset, CountOracle)> {
    gen_nb_misspec_with_size(n, seed, NB_SIZE)
}

pub fn gen_nb_misspec_with_size(n: usize, seed: u64, size: f64) -> Result<(Dataset, CountOracle)> {
    if !(size > 0.0 && size.is_finite()) {
        return Err(Error::InvalidParameter {
            name: "size",
            value: size,
            reason: "must be positive and finite",
        });
    }
    gen_misspec(n, seed, CountOracle::NegBin { alpha: MISSPEC_ALPHA, size })
}

/// Which side of the model carries the sparse coefficients.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum VarselVariant {
    /// logit q regressed, beta fixed.
    RegQ { beta: f64 },
    /// q fixed, log beta regressed.
    RegBeta { q: f64 },
    /// Both regressed with independent sparse coefficient vectors.
    RegQRegBeta,
}

impl VarselVariant {
    pub fn model(self) -> ModelSpec {
        match self {
            Self::RegQ { .. } => ModelSpec::new(QLink::Logit, true, false),
            Self::RegBeta { .. } => ModelSpec::new(QLink::Logit, false, true),
            Self::RegQRegBeta => ModelSpec::new(QLink::Logit, true, true),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VarselTruth {
    pub variant: VarselVariant,
    pub model: ModelSpec,
    pub params: RegressionParams,
    /// Positions of the slope coefficients in the flattened `(theta, gamma)`
    /// vector, in the order of `truth_nonzero`.
    pub slope_indices: Vec<usize>,
    pub truth_nonzero: Vec<bool>,
}

/// Slopes ~ U(-0.5, 0.5) with `floor(frac_zero * p)` of them zeroed at random
/// positions (37 of 50 at 75%); intercept 0.
fn sparse_coefficients(p: usize, frac_zero: f64, rng: &mut SeededRng) -> Vec<f64> {
    let mut c: Vec<f64> = (0..p).map(|_| rng.random::<f64>() - 0.5).collect();
    let zeros = ((frac_zero * p as f64) + 1e-9).floor() as usize;
    for j in sample_indices(rng, p, zeros.min(p)) {
        c[j] = 0.0;
    }
    let mut v = vec![0.0];
    v.extend(c);
    v
}

/// Sparse high-dimensional design with `p` covariates ~ U(0, 1.5).
pub fn gen_varsel(
    n: usize,
    p: usize,
    frac_zero: f64,
    variant: VarselVariant,
    seed: u64,
) -> Result<(Dataset, VarselTruth)> {
    if n == 0 || p == 0 {
        return Err(Error::EmptyInput);
    }
    if !(0.0..=1.0).contains(&frac_zero) {
        return Err(Error::InvalidParameter {
            name: "frac_zero",
            value: frac_zero,
            reason: "must lie in [0, 1]",
        });
    }
    let mut rng = seeded_rng(seed);
    let model = variant.model();
    let params = match variant {
        VarselVariant::RegQ { beta } => RegressionParams {
            theta: sparse_coefficients(p, frac_zero, &mut rng),
            gamma: vec![beta.ln()],
        },
        VarselVariant::RegBeta { q } => RegressionParams {
            theta: vec![logit(q)],
            gamma: sparse_coefficients(p, frac_zero, &mut rng),
        },
        VarselVariant::RegQRegBeta => RegressionParams {
            theta: sparse_coefficients(p, frac_zero, &mut rng),
            gamma: sparse_coefficients(p, frac_zero, &mut rng),
        },
    };
    let rows = uniform_rows(n, &vec![COVARIATE_HIGH; p], &mut rng);
    let mut y = Vec::with_capacity(n);
    for r in &rows {
        let mut x = vec![1.0];
        x.extend(r);
        y.push(regression::conditional_params(&x, &params, &model)?.draw(&mut rng));
    }
    let nt = params.theta.len();
    let mut slope_indices = Vec::new();
    if model.q_regressed {
        slope_indices.extend(1..nt);
    }
    if model.beta_regressed {
        slope_indices.extend(nt + 1..nt + params.gamma.len());
    }
    let flat = params.to_vec();
    let truth_nonzero = slope_indices.iter().map(|&j| flat[j] != 0.0).collect();
    let data = Dataset::from_covariates(y, &rows, &names(p))?;
    Ok((
        data,
        VarselTruth {
            variant,
            model,
            params,
            slope_indices,
            truth_nonzero,
        },
    ))
}

/// `(1/2) sum |a(y) - b(y)|` over `y = 0..=truncation`. Both pmfs must place
/// at least `1 - 1e-6` of their mass inside the range.
pub fn tv_distance<A, B>(a: A, b: B, truncation: u64) -> Result<f64>
where
    A: Fn(u64) -> f64,
    B: Fn(u64) -> f64,
{
    let (mut ma, mut mb, mut d) = (0.0, 0.0, 0.0);
    for y in 0..=truncation {
        let (pa, pb) = (a(y), b(y));
        ma += pa;
        mb += pb;
        d += (pa - pb).abs();
    }
    if ma < 1.0 - 1e-6 || mb < 1.0 - 1e-6 {
        return Err(Error::InsufficientRange {
            max_value: truncation,
        });
    }
    Ok(0.5 * d)
}

/// Smallest truncation point holding all but `1e-9` of an oracle's mass.
pub fn oracle_truncation(oracle: &CountOracle, x: &[f64]) -> u64 {
    let mut mass = 0.0;
    let mut y = 0;
    loop {
        mass += oracle.pmf(x, y);
        if mass >= 1.0 - 1e-9 || y > 1_000_000 {
            return y;
        }
        y += 1;
    }
}
