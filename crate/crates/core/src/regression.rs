//! Discrete Weibull regression.
//!
//! `q` is linked to the covariates through either
//! `logit(q) = x·theta` or `ln(-ln q) = x·theta`, and the shape through
//! `ln(beta) = x·gamma`. Either parameter may instead be held constant, in
//! which case its coefficient vector is intercept-only.

use serde::{Deserialize, Serialize};

use crate::dw::{self, DwParams};
use crate::error::{Error, Result};
use crate::numeric::softplus;
use crate::optim::NelderMead;

/// Saturation bounds for computed `q` and `beta`.
pub const Q_MIN: f64 = 1e-15;
pub const Q_MAX: f64 = 1.0 - 1e-15;
pub const BETA_MIN: f64 = 1e-10;
pub const BETA_MAX: f64 = 1e10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum QLink {
    Logit,
    #[serde(alias = "log-log", alias = "cloglog")]
    LogLog,
}

impl QLink {
    pub fn name(self) -> &'static str {
        match self {
            QLink::Logit => "logit",
            QLink::LogLog => "loglog",
        }
    }

    /// Linear predictor that maps to `q`; the inverse of the link.
    pub fn linpred_from_q(self, q: f64) -> f64 {
        match self {
            QLink::Logit => (q / (1.0 - q)).ln(),
            QLink::LogLog => (-q.ln()).ln(),
        }
    }
}

impl std::str::FromStr for QLink {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "logit" => Ok(QLink::Logit),
            "loglog" | "log-log" => Ok(QLink::LogLog),
            other => Err(Error::InvalidConfig(format!("unknown link `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ModelSpec {
    pub q_link: QLink,
    pub q_regressed: bool,
    pub beta_regressed: bool,
}

impl ModelSpec {
    pub fn new(q_link: QLink, q_regressed: bool, beta_regressed: bool) -> Self {
        Self {
            q_link,
            q_regressed,
            beta_regressed,
        }
    }

    /// Label in the `link:DW(regQ,beta)` style.
    pub fn label(&self) -> String {
        let q = if self.q_regressed { "regQ" } else { "q" };
        let b = if self.beta_regressed { "regBeta" } else { "beta" };
        format!("{}:DW({q},{b})", self.q_link.name())
    }

    pub fn theta_len(&self, ncols: usize) -> usize {
        if self.q_regressed {
            ncols
        } else {
            1
        }
    }

    pub fn gamma_len(&self, ncols: usize) -> usize {
        if self.beta_regressed {
            ncols
        } else {
            1
        }
    }

    pub fn n_free(&self, ncols: usize) -> usize {
        self.theta_len(ncols) + self.gamma_len(ncols)
    }
}

/// Count responses with a design matrix whose first column is all ones.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dataset {
    y: Vec<u64>,
    /// Row-major, `n x ncols`.
    x: Vec<f64>,
    ncols: usize,
    /// Column labels, `names[0]` being the intercept.
    names: Vec<String>,
}

pub const INTERCEPT_NAME: &str = "intercept";

impl Dataset {
    /// Builds a dataset from responses and covariate rows *without* the
    /// intercept column, which is prepended here.
    pub fn from_covariates(
        y: Vec<u64>,
        covariates: &[Vec<f64>],
        covariate_names: &[String],
    ) -> Result<Self> {
        if covariates.len() != y.len() {
            return Err(Error::DimensionMismatch {
                expected: y.len(),
                found: covariates.len(),
            });
        }
        let p = covariate_names.len();
        let mut x = Vec::with_capacity(y.len() * (p + 1));
        for row in covariates {
            if row.len() != p {
                return Err(Error::DimensionMismatch {
                    expected: p,
                    found: row.len(),
                });
            }
            x.push(1.0);
            x.extend_from_slice(row);
        }
        let mut names = vec![INTERCEPT_NAME.to_string()];
        names.extend(covariate_names.iter().cloned());
        Self::from_design(y, x, names)
    }

    /// Builds a dataset from a full row-major design matrix that already
    /// contains the intercept column.
    pub fn from_design(y: Vec<u64>, x: Vec<f64>, names: Vec<String>) -> Result<Self> {
        let ncols = names.len();
        if ncols == 0 {
            return Err(Error::InvalidData("design matrix has no columns".into()));
        }
        if y.is_empty() {
            return Err(Error::EmptyInput);
        }
        if x.len() != y.len() * ncols {
            return Err(Error::DimensionMismatch {
                expected: y.len() * ncols,
                found: x.len(),
            });
        }
        if x.chunks(ncols).any(|r| r[0] != 1.0) {
            return Err(Error::InvalidData("first design column must be all ones".into()));
        }
        if x.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidData("non-finite covariate value".into()));
        }
        Ok(Self { y, x, ncols, names })
    }

    pub fn intercept_only(y: Vec<u64>) -> Result<Self> {
        let x = vec![1.0; y.len()];
        Self::from_design(y, x, vec![INTERCEPT_NAME.to_string()])
    }

    pub fn n(&self) -> usize {
        self.y.len()
    }

    pub fn ncols(&self) -> usize {
        self.ncols
    }

    pub fn y(&self) -> &[u64] {
        &self.y
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.x[i * self.ncols..(i + 1) * self.ncols]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        self.x.chunks(self.ncols)
    }

    /// Z-scores every non-intercept column (sample sd); constant columns are
    /// only centred.
    pub fn standardized(&self) -> Self {
        let n = self.n() as f64;
        let mut x = self.x.clone();
        for j in 1..self.ncols {
            let col: Vec<f64> = self.rows().map(|r| r[j]).collect();
            let m = col.iter().sum::<f64>() / n;
            let sd = (col.iter().map(|v| (v - m).powi(2)).sum::<f64>() / (n - 1.0).max(1.0)).sqrt();
            let sd = if sd > 0.0 { sd } else { 1.0 };
            for i in 0..self.n() {
                x[i * self.ncols + j] = (x[i * self.ncols + j] - m) / sd;
            }
        }
        Self {
            y: self.y.clone(),
            x,
            ncols: self.ncols,
            names: self.names.clone(),
        }
    }

    /// Keeps only the given columns (the intercept is always kept first).
    pub fn select_columns(&self, columns: &[usize]) -> Result<Self> {
        let mut keep = vec![0usize];
        for &c in columns {
            if c >= self.ncols {
                return Err(Error::DimensionMismatch {
                    expected: self.ncols,
                    found: c,
                });
            }
            if c != 0 && !keep.contains(&c) {
                keep.push(c);
            }
        }
        let x = self
            .rows()
            .flat_map(|r| keep.iter().map(move |&c| r[c]))
            .collect();
        let names = keep.iter().map(|&c| self.names[c].clone()).collect();
        Self::from_design(self.y.clone(), x, names)
    }

    /// Appends one observation.
    pub fn push(&mut self, y: u64, row: &[f64]) -> Result<()> {
        if row.len() != self.ncols || row[0] != 1.0 {
            return Err(Error::DimensionMismatch {
                expected: self.ncols,
                found: row.len(),
            });
        }
        self.y.push(y);
        self.x.extend_from_slice(row);
        Ok(())
    }
}

/// Coefficients for `q` (`theta`) and `beta` (`gamma`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegressionParams {
    pub theta: Vec<f64>,
    pub gamma: Vec<f64>,
}

impl RegressionParams {
    pub fn zeros(spec: &ModelSpec, ncols: usize) -> Self {
        Self {
            theta: vec![0.0; spec.theta_len(ncols)],
            gamma: vec![0.0; spec.gamma_len(ncols)],
        }
    }

    /// Flattened `theta ++ gamma`.
    pub fn to_vec(&self) -> Vec<f64> {
        let mut v = self.theta.clone();
        v.extend_from_slice(&self.gamma);
        v
    }

    pub fn from_slice(spec: &ModelSpec, ncols: usize, v: &[f64]) -> Result<Self> {
        let nt = spec.theta_len(ncols);
        let expected = nt + spec.gamma_len(ncols);
        if v.len() != expected {
            return Err(Error::DimensionMismatch {
                expected,
                found: v.len(),
            });
        }
        Ok(Self {
            theta: v[..nt].to_vec(),
            gamma: v[nt..].to_vec(),
        })
    }

    pub fn check(&self, spec: &ModelSpec, ncols: usize) -> Result<()> {
        for (len, want) in [
            (self.theta.len(), spec.theta_len(ncols)),
            (self.gamma.len(), spec.gamma_len(ncols)),
        ] {
            if len != want {
                return Err(Error::DimensionMismatch {
                    expected: want,
                    found: len,
                });
            }
        }
        Ok(())
    }
}

/// Names of the free coefficients in `theta ++ gamma` order, e.g.
/// `theta_intercept, theta_x1, gamma_intercept`.
pub fn parameter_names(spec: &ModelSpec, column_names: &[String]) -> Vec<String> {
    let nt = spec.theta_len(column_names.len());
    let ng = spec.gamma_len(column_names.len());
    column_names[..nt]
        .iter()
        .map(|c| format!("theta_{c}"))
        .chain(column_names[..ng].iter().map(|c| format!("gamma_{c}")))
        .collect()
}

/// `ln q` for linear predictor `eta`, saturated to `[ln Q_MIN, ln Q_MAX]`.
pub fn log_q_from_linpred(eta: f64, link: QLink) -> f64 {
    let raw = match link {
        QLink::Logit => -softplus(-eta),
        QLink::LogLog => -eta.exp(),
    };
    raw.clamp(Q_MIN.ln(), (-1e-15f64).ln_1p())
}

/// `q = e^eta / (1 + e^eta)` (logit) or `q = exp(-exp(eta))` (log-log).
pub fn q_from_linpred(eta: f64, link: QLink) -> f64 {
    log_q_from_linpred(eta, link).exp().clamp(Q_MIN, Q_MAX)
}

/// `beta = e^eta`, saturated to `[BETA_MIN, BETA_MAX]`.
pub fn beta_from_linpred(eta: f64) -> f64 {
    eta.exp().clamp(BETA_MIN, BETA_MAX)
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn conditional_unchecked(x: &[f64], params: &RegressionParams, spec: &ModelSpec) -> DwParams {
    let eta_q = if spec.q_regressed {
        dot(x, &params.theta)
    } else {
        params.theta[0]
    };
    let eta_b = if spec.beta_regressed {
        dot(x, &params.gamma)
    } else {
        params.gamma[0]
    };
    DwParams::from_log_q_unchecked(
        log_q_from_linpred(eta_q, spec.q_link),
        beta_from_linpred(eta_b),
    )
}

/// The discrete Weibull law of `Y` given the covariate row `x`.
pub fn conditional_params(
    x: &[f64],
    params: &RegressionParams,
    spec: &ModelSpec,
) -> Result<DwParams> {
    params.check(spec, x.len())?;
    Ok(conditional_unchecked(x, params, spec))
}

/// Conditional log-likelihood summed over all observations in row order.
pub fn log_likelihood(data: &Dataset, params: &RegressionParams, spec: &ModelSpec) -> f64 {
    debug_assert!(params.check(spec, data.ncols()).is_ok());
    data.rows()
        .zip(data.y())
        .map(|(x, &y)| conditional_unchecked(x, params, spec).ln_pmf(y))
        .sum()
}

/// Per-observation conditional means, `E[Y | x_i]`.
pub fn fitted_means(data: &Dataset, params: &RegressionParams, spec: &ModelSpec) -> Vec<f64> {
    data.rows()
        .map(|x| conditional_unchecked(x, params, spec).mean())
        .collect()
}

pub fn predict_quantile(
    x: &[f64],
    params: &RegressionParams,
    spec: &ModelSpec,
    p: f64,
) -> Result<u64> {
    conditional_params(x, params, spec)?.quantile(p)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RegressionFit {
    pub params: RegressionParams,
    pub log_likelihood: f64,
    pub converged: bool,
    pub evaluations: usize,
}

/// Starting point: intercepts from the method of proportions on the marginal
/// response mapped through the inverse links, slopes at zero.
pub fn initial_params(data: &Dataset, spec: &ModelSpec) -> RegressionParams {
    let mut params = RegressionParams::zeros(spec, data.ncols());
    let marginal = dw::summarize_sample(data.y())
        .map(|sc| dw::starting_point(&sc))
        .unwrap_or_else(|_| DwParams::new(0.5, 1.0).expect("valid"));
    params.theta[0] = spec.q_link.linpred_from_q(marginal.q());
    params.gamma[0] = marginal.beta().ln();
    params
}

/// Maximum-likelihood fit by Nelder-Mead over `theta ++ gamma`.
pub fn mle_fit(data: &Dataset, spec: &ModelSpec) -> Result<RegressionFit> {
    mle_fit_from(data, spec, &initial_params(data, spec))
}

pub fn mle_fit_from(
    data: &Dataset,
    spec: &ModelSpec,
    start: &RegressionParams,
) -> Result<RegressionFit> {
    let ncols = data.ncols();
    start.check(spec, ncols)?;
    let dim = spec.n_free(ncols);
    if data.n() <= dim {
        return Err(Error::InvalidData(format!(
            "{} observations cannot identify {dim} free parameters",
            data.n()
        )));
    }
    let mut scratch = start.clone();
    let nt = spec.theta_len(ncols);
    let objective = |v: &[f64]| {
        scratch.theta.copy_from_slice(&v[..nt]);
        scratch.gamma.copy_from_slice(&v[nt..]);
        -log_likelihood(data, &scratch, spec)
    };
    let nm = NelderMead {
        tol: 1e-8,
        max_evals: 2000 + 500 * dim,
        initial_step: 0.1,
        max_restarts: 8,
    };
    let m = nm.minimize(objective, &start.to_vec());
    Ok(RegressionFit {
        params: RegressionParams::from_slice(spec, ncols, &m.x)?,
        log_likelihood: -m.value,
        converged: m.converged,
        evaluations: m.evals,
    })
}
