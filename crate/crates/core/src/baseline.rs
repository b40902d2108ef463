//! Frequentist Poisson and NB2 log-link regressions used as comparison
//! baselines.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};
use statrs::function::gamma::ln_gamma;

use crate::error::{Error, Result};
use crate::regression::Dataset;

const MAX_ITER: usize = 200;
/// Upper bound on `ln(size)` for the NB dispersion search.
const LN_SIZE_MAX: f64 = 18.0;
const LN_SIZE_MIN: f64 = -10.0;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PoissonFit {
    pub coefficients: Vec<f64>,
    pub log_likelihood: f64,
    pub converged: bool,
    pub iterations: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct NbFit {
    pub coefficients: Vec<f64>,
    /// Size parameter `theta` of `Var = mu + mu^2 / theta`.
    pub dispersion: f64,
    pub log_likelihood: f64,
    pub converged: bool,
    /// The dispersion ran into the Poisson limit.
    pub at_boundary: bool,
    pub iterations: usize,
}

fn linpred(data: &Dataset, coef: &[f64]) -> Vec<f64> {
    data.rows()
        .map(|r| r.iter().zip(coef).map(|(a, b)| a * b).sum())
        .collect()
}

pub fn poisson_means(data: &Dataset, coef: &[f64]) -> Vec<f64> {
    linpred(data, coef).into_iter().map(f64::exp).collect()
}

pub fn poisson_log_likelihood(data: &Dataset, coef: &[f64]) -> f64 {
    data.y()
        .iter()
        .zip(linpred(data, coef))
        .map(|(&y, eta)| {
            let yf = y as f64;
            yf * eta - eta.exp() - ln_gamma(yf + 1.0)
        })
        .sum()
}

pub fn nb_log_likelihood(data: &Dataset, coef: &[f64], size: f64) -> f64 {
    let lg_size = ln_gamma(size);
    data.y()
        .iter()
        .zip(poisson_means(data, coef))
        .map(|(&y, mu)| nb_ln_pmf(y, mu, size, lg_size))
        .sum()
}

/// NB2 log-pmf; `lg_size` is `ln Gamma(size)`.
fn nb_ln_pmf(y: u64, mu: f64, size: f64, lg_size: f64) -> f64 {
    let yf = y as f64;
    let log_denom = (size + mu).ln();
    ln_gamma(yf + size) - lg_size - ln_gamma(yf + 1.0) + size * (size.ln() - log_denom)
        + if y > 0 { yf * (mu.ln() - log_denom) } else { 0.0 }
}

fn design(data: &Dataset) -> DMatrix<f64> {
    DMatrix::from_fn(data.n(), data.ncols(), |i, j| data.row(i)[j])
}

/// Fisher scoring for log-link models with working weights `w(mu)` and score
/// residual `r(y, mu)`; `size = None` is Poisson.
fn score_coefficients(
    data: &Dataset,
    x: &DMatrix<f64>,
    start: &[f64],
    size: Option<f64>,
) -> Result<(Vec<f64>, f64, bool, usize)> {
    let objective = |c: &[f64]| match size {
        None => poisson_log_likelihood(data, c),
        Some(k) => nb_log_likelihood(data, c, k),
    };
    let mut coef = start.to_vec();
    let mut ll = objective(&coef);
    for iter in 1..=MAX_ITER {
        let mu = poisson_means(data, &coef);
        let p = data.ncols();
        let mut info = DMatrix::<f64>::zeros(p, p);
        let mut grad = DVector::<f64>::zeros(p);
        for (i, (&y, &m)) in data.y().iter().zip(&mu).enumerate() {
            let damp = size.map_or(1.0, |k| 1.0 / (1.0 + m / k));
            let w = m * damp;
            let r = (y as f64 - m) * damp;
            let row = x.row(i);
            grad += row.transpose() * r;
            info += row.transpose() * row * w;
        }
        let step = info
            .cholesky()
            .ok_or_else(|| Error::Numerical("singular information matrix (separation?)".into()))?
            .solve(&grad);
        let mut t = 1.0;
        let mut accepted = false;
        for _ in 0..30 {
            let trial: Vec<f64> = coef.iter().zip(step.iter()).map(|(c, s)| c + t * s).collect();
            let trial_ll = objective(&trial);
            if trial_ll.is_finite() && trial_ll >= ll - 1e-12 * ll.abs() {
                let gain = trial_ll - ll;
                coef = trial;
                ll = trial_ll;
                accepted = true;
                if gain.abs() <= 1e-10 * (ll.abs() + 1.0) && step.amax() * t < 1e-6 {
                    return Ok((coef, ll, true, iter));
                }
                break;
            }
            t *= 0.5;
        }
        if !accepted {
            // no ascent direction left
            return Ok((coef, ll, step.amax() < 1e-4, iter));
        }
    }
    Ok((coef, ll, false, MAX_ITER))
}

fn intercept_start(data: &Dataset) -> Result<Vec<f64>> {
    let mean = data.y().iter().sum::<u64>() as f64 / data.n() as f64;
    if mean <= 0.0 {
        return Err(Error::InvalidData("all responses are zero".into()));
    }
    let mut start = vec![0.0; data.ncols()];
    start[0] = mean.ln();
    Ok(start)
}

/// Log-link Poisson regression by Fisher scoring.
pub fn fit_poisson_baseline(data: &Dataset) -> Result<PoissonFit> {
    let x = design(data);
    let start = intercept_start(data)?;
    let (coefficients, log_likelihood, converged, iterations) =
        score_coefficients(data, &x, &start, None)?;
    if coefficients.iter().any(|c| !c.is_finite() || c.abs() > 1e3) {
        return Err(Error::Numerical("Poisson coefficients diverged".into()));
    }
    Ok(PoissonFit {
        coefficients,
        log_likelihood,
        converged,
        iterations,
    })
}

/// Golden-section maximisation of the NB log-likelihood over `ln(size)`.
fn best_log_size(data: &Dataset, coef: &[f64]) -> f64 {
    let f = |s: f64| nb_log_likelihood(data, coef, s.exp());
    let g = (5f64.sqrt() - 1.0) / 2.0;
    let (mut a, mut b) = (LN_SIZE_MIN, LN_SIZE_MAX);
    let mut c = b - g * (b - a);
    let mut d = a + g * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    while b - a > 1e-9 {
        if fc >= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - g * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + g * (b - a);
            fd = f(d);
        }
    }
    0.5 * (a + b)
}

/// NB2 regression: alternates Fisher scoring for the coefficients with a
/// one-dimensional search for the size parameter.
pub fn fit_nb_baseline(data: &Dataset) -> Result<NbFit> {
    let x = design(data);
    let poisson = fit_poisson_baseline(data)?;
    let mut coef = poisson.coefficients;
    let mut log_size = best_log_size(data, &coef);
    let mut ll = nb_log_likelihood(data, &coef, log_size.exp());
    let mut converged = false;
    let mut iterations = 0;
    for iter in 1..=100 {
        iterations = iter;
        let (c, _, _, _) = score_coefficients(data, &x, &coef, Some(log_size.exp()))?;
        coef = c;
        log_size = best_log_size(data, &coef);
        let new_ll = nb_log_likelihood(data, &coef, log_size.exp());
        let gain = new_ll - ll;
        ll = new_ll;
        if gain.abs() <= 1e-10 * (ll.abs() + 1.0) {
            converged = true;
            break;
        }
    }
    // the likelihood is flat in the Poisson limit, so compare values rather
    // than positions
    let ll_limit = nb_log_likelihood(data, &coef, LN_SIZE_MAX.exp());
    Ok(NbFit {
        coefficients: coef,
        dispersion: log_size.exp(),
        log_likelihood: ll,
        converged,
        at_boundary: ll_limit >= ll - 1e-8 * (ll.abs() + 1.0),
        iterations,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::seeded_rng;
    use rand::Rng;
    use rand_distr::{Distribution, Gamma, Poisson};

    fn sim(n: usize, size: Option<f64>, seed: u64) -> Dataset {
        let mut rng = seeded_rng(seed);
        let mut rows = Vec::new();
        let mut y = Vec::new();
        for _ in 0..n {
            let x1: f64 = rng.random();
            let x2: f64 = rng.random::<f64>() * 1.5;
            let mu = (-0.5 + 4.3 * x1 - 2.2 * x2).exp();
            let lambda = match size {
                None => mu,
                Some(k) => Gamma::new(k, mu / k).unwrap().sample(&mut rng),
            };
            y.push(Poisson::new(lambda.max(1e-300)).unwrap().sample(&mut rng) as u64);
            rows.push(vec![x1, x2]);
        }
        Dataset::from_covariates(y, &rows, &["x1".into(), "x2".into()]).unwrap()
    }

    #[test]
    fn intercept_only_poisson_is_log_mean() {
        let data = Dataset::intercept_only(vec![0, 1, 4, 2, 3, 0, 7]).unwrap();
        let fit = fit_poisson_baseline(&data).unwrap();
        assert!(fit.converged);
        assert!((fit.coefficients[0] - (17.0f64 / 7.0).ln()).abs() < 1e-8);
    }

    #[test]
    fn poisson_log_likelihood_matches_direct_sum() {
        let data = sim(50, None, 1);
        let coef = [0.1, 0.5, -0.3];
        let mut direct = 0.0;
        for (r, &y) in data.rows().zip(data.y()) {
            let mu: f64 = (0.1 + 0.5 * r[1] - 0.3 * r[2]).exp();
            let mut ln_fact = 0.0;
            for k in 2..=y {
                ln_fact += (k as f64).ln();
            }
            direct += y as f64 * mu.ln() - mu - ln_fact;
        }
        assert!((poisson_log_likelihood(&data, &coef) - direct).abs() < 1e-9);
    }

    #[test]
    fn poisson_recovers_coefficients() {
        let fit = fit_poisson_baseline(&sim(5000, None, 2)).unwrap();
        for (c, t) in fit.coefficients.iter().zip([-0.5, 4.3, -2.2]) {
            assert!((c - t).abs() < 0.1, "{:?}", fit.coefficients);
        }
    }

    #[test]
    fn nb_recovers_dispersion_and_dominates_poisson() {
        let data = sim(5000, Some(4.5), 3);
        let nb = fit_nb_baseline(&data).unwrap();
        assert!(nb.converged);
        assert!((nb.dispersion - 4.5).abs() < 0.8, "{}", nb.dispersion);
        let pois = fit_poisson_baseline(&data).unwrap();
        assert!(nb.log_likelihood >= pois.log_likelihood);
    }

    #[test]
    fn nb_intercept_only_mean_is_sample_mean() {
        let mut rng = seeded_rng(9);
        let y: Vec<u64> = (0..400)
            .map(|_| {
                let l = Gamma::new(2.0, 1.5).unwrap().sample(&mut rng);
                Poisson::new(l).unwrap().sample(&mut rng) as u64
            })
            .collect();
        let mean = y.iter().sum::<u64>() as f64 / y.len() as f64;
        let nb = fit_nb_baseline(&Dataset::intercept_only(y).unwrap()).unwrap();
        assert!((nb.coefficients[0].exp() - mean).abs() < 1e-6);
    }

    #[test]
    fn nb_on_poisson_data_hits_boundary() {
        let data = Dataset::intercept_only(vec![2, 2, 2, 2, 3, 1, 2, 2]).unwrap();
        let nb = fit_nb_baseline(&data).unwrap();
        assert!(nb.at_boundary);
    }

    #[test]
    fn all_zero_response_is_rejected() {
        let data = Dataset::intercept_only(vec![0, 0, 0]).unwrap();
        assert!(fit_poisson_baseline(&data).is_err());
    }
}
