//! Model-comparison criteria: AIC, BIC, CAIC, QIC, DIC, BPIC and the log
//! prior predictive density.

use rand::Rng;
use rand_distr::{Distribution, Exp, Gamma, Normal};
use serde::{Deserialize, Serialize};

use crate::baseline::{self, NbFit, PoissonFit};
use crate::error::{Error, Result};
use crate::mcmc::ChainOutput;
use crate::numeric::mean;
use crate::posterior;
use crate::priors::{PriorKind, PriorSpec};
use crate::regression::{self, Dataset, ModelSpec, RegressionFit, RegressionParams};

/// Standard deviation of the Gaussian that stands in for improper flat
/// priors (and for unpenalized intercepts) when sampling from the prior.
pub const SURROGATE_SD: f64 = 100.0;
pub const DEFAULT_PPD_DRAWS: usize = 10_000;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InformationCriteria {
    pub aic: f64,
    pub bic: f64,
    pub caic: f64,
}

pub fn aic_bic_caic(loglik: f64, df: usize, n: f64) -> InformationCriteria {
    let k = df as f64;
    let dev = -2.0 * loglik;
    InformationCriteria {
        aic: dev + 2.0 * k,
        bic: dev + k * n.ln(),
        caic: dev + k * (n.ln() + 1.0),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DevianceCriteria {
    pub mean_deviance: f64,
    pub p_d: f64,
    pub dic: f64,
    pub bpic: f64,
    /// `p_d < 0`, which happens under strongly skewed posteriors.
    pub negative_pd: bool,
}

/// DIC and BPIC from a log-likelihood trace and the log-likelihood at the
/// posterior mean.
pub fn dic_bpic(loglik_trace: &[f64], loglik_at_mean: f64) -> Result<DevianceCriteria> {
    if loglik_trace.len() < posterior::MIN_SAMPLES {
        return Err(Error::TooFewSamples {
            needed: posterior::MIN_SAMPLES,
            found: loglik_trace.len(),
        });
    }
    let dbar = -2.0 * mean(loglik_trace);
    let p_d = dbar + 2.0 * loglik_at_mean;
    Ok(DevianceCriteria {
        mean_deviance: dbar,
        p_d,
        dic: dbar + p_d,
        bpic: dbar + 2.0 * p_d,
        negative_pd: p_d < 0.0,
    })
}

/// Per-observation QIC, `-2 Qbar + 2k/n`, with the Poisson quasi-likelihood
/// `Q = sum(y ln mu - mu) / n` and independence working correlation.
pub fn qic(y: &[u64], means: &[f64], df: usize) -> Result<f64> {
    if y.len() != means.len() {
        return Err(Error::DimensionMismatch {
            expected: y.len(),
            found: means.len(),
        });
    }
    if y.is_empty() {
        return Err(Error::EmptyInput);
    }
    let mut q = 0.0;
    for (&yi, &mu) in y.iter().zip(means) {
        if !(mu > 0.0 && mu.is_finite()) {
            return Err(Error::Numerical(format!("fitted mean {mu} is not positive")));
        }
        let yf = yi as f64;
        q += if yi == 0 { -mu } else { yf * mu.ln() - mu };
    }
    let n = y.len() as f64;
    Ok(-2.0 * q / n + 2.0 * df as f64 / n)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LogPpd {
    /// `None` when every draw underflowed.
    pub value: Option<f64>,
    /// Delta-method standard error of `value`.
    pub mc_se: f64,
    pub draws: usize,
}

/// `ln mean(exp(l_m))` over `draws` Monte Carlo log-likelihoods, shifted by
/// the maximum before exponentiating.
pub fn log_mean_exp_mc<R, F>(draws: usize, rng: &mut R, mut loglik: F) -> Result<LogPpd>
where
    R: Rng + ?Sized,
    F: FnMut(&mut R) -> f64,
{
    if draws < 2 {
        return Err(Error::TooFewSamples {
            needed: 2,
            found: draws,
        });
    }
    let values: Vec<f64> = (0..draws).map(|_| loglik(rng)).collect();
    let max = values
        .iter()
        .copied()
        .filter(|v| !v.is_nan())
        .fold(f64::NEG_INFINITY, f64::max);
    if !max.is_finite() {
        return Ok(LogPpd {
            value: None,
            mc_se: f64::NAN,
            draws,
        });
    }
    let w: Vec<f64> = values
        .iter()
        .map(|v| if v.is_nan() { 0.0 } else { (v - max).exp() })
        .collect();
    let wbar = mean(&w);
    let var = w.iter().map(|x| (x - wbar) * (x - wbar)).sum::<f64>() / (draws - 1) as f64;
    Ok(LogPpd {
        value: Some(max + wbar.ln()),
        mc_se: (var / draws as f64).sqrt() / wbar,
        draws,
    })
}

fn draw_block<R: Rng + ?Sized>(
    len: usize,
    penalized_from: usize,
    rate: Option<f64>,
    rng: &mut R,
) -> Vec<f64> {
    let wide = Normal::new(0.0, SURROGATE_SD).expect("valid sd");
    (0..len)
        .map(|j| match rate {
            Some(r) if j >= penalized_from => {
                let mag = Exp::new(r).expect("positive rate").sample(rng);
                if rng.random::<bool>() {
                    mag
                } else {
                    -mag
                }
            }
            _ => wide.sample(rng),
        })
        .collect()
}

/// One draw of the coefficients from the prior. Flat priors and
/// unpenalized intercepts use a N(0, 100^2) surrogate.
pub fn draw_prior_params<R: Rng + ?Sized>(
    model: &ModelSpec,
    prior: &PriorSpec,
    ncols: usize,
    rng: &mut R,
) -> RegressionParams {
    let zero = RegressionParams::zeros(model, ncols);
    let skip = usize::from(!prior.penalize_intercepts);
    let (lambda, tau) = match prior.kind {
        PriorKind::Flat => (None, None),
        PriorKind::Laplace => {
            let g = Gamma::new(prior.hyper_a, 1.0 / prior.hyper_b).expect("validated hyper-prior");
            (Some(g.sample(rng)), Some(g.sample(rng)))
        }
    };
    RegressionParams {
        theta: draw_block(zero.theta.len(), skip, lambda, rng),
        gamma: draw_block(zero.gamma.len(), skip, tau, rng),
    }
}

/// Log prior predictive density of a discrete Weibull regression.
pub fn log_ppd<R: Rng + ?Sized>(
    data: &Dataset,
    model: &ModelSpec,
    prior: &PriorSpec,
    draws: usize,
    rng: &mut R,
) -> Result<LogPpd> {
    prior.validate()?;
    log_mean_exp_mc(draws, rng, |r| {
        let p = draw_prior_params(model, prior, data.ncols(), r);
        regression::log_likelihood(data, &p, model)
    })
}

/// One row of a comparison table. Absent entries are `None`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CriteriaReport {
    pub model: String,
    pub aic: Option<f64>,
    pub bic: Option<f64>,
    pub caic: Option<f64>,
    pub qic: Option<f64>,
    pub dic: Option<f64>,
    pub bpic: Option<f64>,
    pub log_ppd: Option<f64>,
    pub log_ppd_se: Option<f64>,
    pub df: usize,
    pub n: usize,
    pub negative_pd: bool,
}

pub const CSV_HEADER: [&str; 9] = ["Model", "AIC", "BIC", "CAIC", "QIC", "DIC", "BPIC", "log(PPD)", "df"];

impl CriteriaReport {
    /// Numeric columns in table order, AIC to log(PPD).
    pub fn values(&self) -> [Option<f64>; 7] {
        [self.aic, self.bic, self.caic, self.qic, self.dic, self.bpic, self.log_ppd]
    }
}

/// Assembles a report from the ingredients of one fit.
pub fn criteria_report(
    model: &str,
    y: &[u64],
    df: usize,
    loglik_at_estimate: f64,
    fitted_means: &[f64],
    deviance: Option<DevianceCriteria>,
    ppd: Option<LogPpd>,
) -> Result<CriteriaReport> {
    if df == 0 {
        return Err(Error::InvalidConfig("df must be >= 1".into()));
    }
    let n = y.len();
    let ic = aic_bic_caic(loglik_at_estimate, df, n as f64);
    let finite = |v: f64| v.is_finite().then_some(v);
    Ok(CriteriaReport {
        model: model.to_string(),
        aic: finite(ic.aic),
        bic: finite(ic.bic),
        caic: finite(ic.caic),
        qic: qic(y, fitted_means, df).ok().and_then(finite),
        dic: deviance.and_then(|d| finite(d.dic)),
        bpic: deviance.and_then(|d| finite(d.bpic)),
        log_ppd: ppd.and_then(|p| p.value),
        log_ppd_se: ppd.and_then(|p| p.value.map(|_| p.mc_se)),
        df,
        n,
        negative_pd: deviance.is_some_and(|d| d.negative_pd),
    })
}

/// Criteria of a Bayesian fit. AIC/BIC/CAIC and QIC use the marginal
/// posterior modes; DIC plugs in the posterior mean.
pub fn bayesian_report<R: Rng + ?Sized>(
    data: &Dataset,
    chain: &ChainOutput,
    ppd_draws: usize,
    rng: &mut R,
) -> Result<CriteriaReport> {
    let modes = (0..chain.n_coefficients)
        .map(|j| posterior::marginal_mode(&chain.column(j)))
        .collect::<Result<Vec<_>>>()?;
    let at_mode = RegressionParams::from_slice(&chain.model, data.ncols(), &modes)?;
    let at_mean = chain.posterior_mean(data.ncols())?;
    let model = &chain.model;
    let deviance = dic_bpic(
        &chain.loglik_trace,
        regression::log_likelihood(data, &at_mean, model),
    )?;
    let ppd = if ppd_draws > 0 {
        Some(log_ppd(data, model, &chain.prior, ppd_draws, rng)?)
    } else {
        None
    };
    criteria_report(
        &format!("Bayes {}", model.label()),
        data.y(),
        chain.n_coefficients,
        regression::log_likelihood(data, &at_mode, model),
        &regression::fitted_means(data, &at_mode, model),
        Some(deviance),
        ppd,
    )
}

pub fn mle_report(data: &Dataset, model: &ModelSpec, fit: &RegressionFit) -> Result<CriteriaReport> {
    criteria_report(
        &format!("MLE {}", model.label()),
        data.y(),
        model.n_free(data.ncols()),
        fit.log_likelihood,
        &regression::fitted_means(data, &fit.params, model),
        None,
        None,
    )
}

pub fn poisson_report(data: &Dataset, fit: &PoissonFit) -> Result<CriteriaReport> {
    criteria_report(
        "Poisson",
        data.y(),
        fit.coefficients.len(),
        fit.log_likelihood,
        &baseline::poisson_means(data, &fit.coefficients),
        None,
        None,
    )
}

pub fn nb_report(data: &Dataset, fit: &NbFit) -> Result<CriteriaReport> {
    criteria_report(
        "NB",
        data.y(),
        fit.coefficients.len() + 1,
        fit.log_likelihood,
        &baseline::poisson_means(data, &fit.coefficients),
        None,
        None,
    )
}

fn fmt_value(v: Option<f64>, decimals: usize, star: bool) -> String {
    match v {
        None => "-".into(),
        Some(x) => format!("{x:.decimals$}{}", if star { "*" } else { "" }),
    }
}

/// Marks, per column, which rows hold the best value: the minimum for
/// every criterion except log(PPD), where larger is better.
pub fn best_flags(reports: &[CriteriaReport]) -> Vec<[bool; 7]> {
    let mut flags = vec![[false; 7]; reports.len()];
    for c in 0..7 {
        let vals: Vec<Option<f64>> = reports.iter().map(|r| r.values()[c]).collect();
        let best = vals.iter().flatten().copied().fold(None, |acc: Option<f64>, v| {
            Some(match acc {
                None => v,
                Some(a) if c == 6 => a.max(v),
                Some(a) => a.min(v),
            })
        });
        if let Some(b) = best {
            for (f, v) in flags.iter_mut().zip(&vals) {
                f[c] = *v == Some(b);
            }
        }
    }
    flags
}

/// Rows of the comparison table as strings, header first.
pub fn table_rows(reports: &[CriteriaReport], star_best: bool) -> Vec<Vec<String>> {
    let flags = best_flags(reports);
    let mut rows = vec![CSV_HEADER.iter().map(|s| s.to_string()).collect::<Vec<_>>()];
    for (r, f) in reports.iter().zip(flags) {
        let mut row = vec![r.model.clone()];
        for (c, v) in r.values().into_iter().enumerate() {
            let decimals = if c == 3 { 4 } else { 2 };
            row.push(fmt_value(v, decimals, star_best && f[c]));
        }
        row.push(r.df.to_string());
        rows.push(row);
    }
    rows
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::regression::QLink;
    use crate::seeded_rng;
    use rand_distr::StandardNormal;
    use statrs::function::gamma::ln_gamma;

    #[test]
    fn information_criteria_arithmetic() {
        let ic = aic_bic_caic(-100.0, 2, 2f64.exp());
        assert!((ic.aic - 204.0).abs() < 1e-12);
        assert!((ic.bic - 204.0).abs() < 1e-12);
        assert!((ic.caic - 206.0).abs() < 1e-12);
        let zero = aic_bic_caic(-50.0, 0, 10.0);
        assert_eq!((zero.aic, zero.bic, zero.caic), (100.0, 100.0, 100.0));
    }

    #[test]
    fn caic_is_bic_plus_k() {
        for (ll, k, n) in [(-3.0, 1, 5.0), (-1234.5, 7, 1127.0), (10.0, 3, 27326.0)] {
            let ic = aic_bic_caic(ll, k, n);
            assert!((ic.caic - ic.bic - k as f64).abs() < 1e-9);
            if n > 2f64.exp() {
                assert!(ic.bic >= ic.aic);
            }
        }
    }

    #[test]
    fn dic_identities() {
        let d = dic_bpic(&[-10.0; 200], -10.0).unwrap();
        assert_eq!(d.p_d, 0.0);
        assert_eq!(d.dic, d.mean_deviance);
        assert_eq!(d.bpic, d.mean_deviance);
        let trace: Vec<f64> = (0..300).map(|i| -10.0 - (i % 7) as f64 * 0.1).collect();
        let d = dic_bpic(&trace, -10.0).unwrap();
        assert!((d.bpic - d.dic - d.p_d).abs() < 1e-12);
        let neg = dic_bpic(&trace, -12.0).unwrap();
        assert!(neg.negative_pd && neg.bpic < neg.dic);
        assert!(dic_bpic(&[0.0; 20], 0.0).is_err());
    }

    /// Two independent Gaussian means with unit variance and flat priors:
    /// the posterior is exact, so p_D should be close to 2.
    #[test]
    fn conjugate_gaussian_effective_parameters() {
        let mut rng = seeded_rng(21);
        let ya: Vec<f64> = (0..40).map(|_| 1.0 + rng.sample::<f64, _>(StandardNormal)).collect();
        let yb: Vec<f64> = (0..60).map(|_| -2.0 + rng.sample::<f64, _>(StandardNormal)).collect();
        let ll = |ma: f64, mb: f64| {
            let f = |y: &[f64], m: f64| {
                y.iter()
                    .map(|v| -0.5 * (v - m).powi(2) - 0.5 * (2.0 * std::f64::consts::PI).ln())
                    .sum::<f64>()
            };
            f(&ya, ma) + f(&yb, mb)
        };
        let (abar, bbar) = (mean(&ya), mean(&yb));
        let mut trace = Vec::new();
        let (mut sa, mut sb) = (0.0, 0.0);
        let m = 20_000;
        for _ in 0..m {
            let a = abar + rng.sample::<f64, _>(StandardNormal) / 40f64.sqrt();
            let b = bbar + rng.sample::<f64, _>(StandardNormal) / 60f64.sqrt();
            sa += a;
            sb += b;
            trace.push(ll(a, b));
        }
        let d = dic_bpic(&trace, ll(sa / m as f64, sb / m as f64)).unwrap();
        assert!((d.p_d - 2.0).abs() < 0.2, "{}", d.p_d);
    }

    #[test]
    fn qic_examples() {
        // one observation at its own mean
        let y = 6u64;
        let want = -2.0 * (6.0 * 6f64.ln() - 6.0) + 2.0;
        assert!((qic(&[y], &[6.0], 1).unwrap() - want).abs() < 1e-12);
        assert!(qic(&[1], &[0.0], 1).is_err());
        assert!(qic(&[1, 2], &[1.0], 1).is_err());
    }

    #[test]
    fn qic_prefers_true_poisson_means() {
        let mut rng = seeded_rng(3);
        let mut y = Vec::new();
        let mut mu = Vec::new();
        for i in 0..5000 {
            let m = (0.2 + 2.0 * (i as f64 / 5000.0)).exp();
            mu.push(m);
            y.push(rand_distr::Poisson::new(m).unwrap().sample(&mut rng) as u64);
        }
        let ybar = y.iter().sum::<u64>() as f64 / y.len() as f64;
        let flat = vec![ybar; y.len()];
        assert!(qic(&y, &mu, 2).unwrap() < qic(&y, &flat, 1).unwrap());
    }

    #[test]
    fn log_ppd_of_constant_likelihood_is_zero() {
        let mut rng = seeded_rng(1);
        let r = log_mean_exp_mc(100, &mut rng, |_| 0.0).unwrap();
        assert!(r.value.unwrap().abs() < 1e-15);
        let under = log_mean_exp_mc(100, &mut rng, |_| f64::NEG_INFINITY).unwrap();
        assert_eq!(under.value, None);
    }

    /// Bernoulli data, Beta(2, 3) prior: the marginal likelihood is
    /// B(2 + k, 3 + n - k) / B(2, 3).
    #[test]
    fn beta_bernoulli_marginal() {
        let (n, k) = (20.0, 7.0);
        let ln_beta = |a: f64, b: f64| ln_gamma(a) + ln_gamma(b) - ln_gamma(a + b);
        let exact = ln_beta(2.0 + k, 3.0 + n - k) - ln_beta(2.0, 3.0);
        let prior = rand_distr::Beta::new(2.0, 3.0).unwrap();
        let mut rng = seeded_rng(8);
        let est = log_mean_exp_mc(40_000, &mut rng, |r| {
            let p: f64 = prior.sample(r);
            k * p.ln() + (n - k) * (1.0 - p).ln()
        })
        .unwrap();
        let v = est.value.unwrap();
        assert!((v - exact).abs() < 3.0 * est.mc_se, "{v} {exact} {}", est.mc_se);

        let mut rng2 = seeded_rng(9);
        let twice = log_mean_exp_mc(80_000, &mut rng2, |r| {
            let p: f64 = prior.sample(r);
            k * p.ln() + (n - k) * (1.0 - p).ln()
        })
        .unwrap();
        let combined = (est.mc_se.powi(2) + twice.mc_se.powi(2)).sqrt();
        assert!((twice.value.unwrap() - v).abs() < 3.0 * combined);
    }

    #[test]
    fn prior_draws_respect_intercept_switch() {
        let model = ModelSpec::new(QLink::Logit, true, true);
        let mut rng = seeded_rng(2);
        let prior = PriorSpec::laplace(2.0, 1.0);
        let mut big = 0;
        for _ in 0..2000 {
            let p = draw_prior_params(&model, &prior, 3, &mut rng);
            assert_eq!((p.theta.len(), p.gamma.len()), (3, 3));
            if p.theta[0].abs() > 20.0 {
                big += 1;
            }
            // slopes are Laplace with Gamma(2,1) rates: |c| > 50 is negligible
            assert!(p.theta[1].abs() < 200.0);
        }
        assert!(big > 1000);
    }

    #[test]
    fn report_matches_components() {
        let data = Dataset::intercept_only(vec![0, 1, 1, 2, 0, 3, 1, 0, 2, 1]).unwrap();
        let model = ModelSpec::new(QLink::Logit, false, false);
        let fit = regression::mle_fit(&data, &model).unwrap();
        let r = mle_report(&data, &model, &fit).unwrap();
        let ic = aic_bic_caic(fit.log_likelihood, 2, 10.0);
        assert_eq!(r.aic, Some(ic.aic));
        assert_eq!(r.bic, Some(ic.bic));
        assert_eq!(r.caic, Some(ic.caic));
        let mu = regression::fitted_means(&data, &fit.params, &model);
        assert_eq!(r.qic, Some(qic(data.y(), &mu, 2).unwrap()));
        assert_eq!((r.dic, r.bpic, r.log_ppd), (None, None, None));
        assert_eq!(r.df, 2);
    }

    #[test]
    fn table_layout_and_stars() {
        let mk = |name: &str, aic: f64, ppd: Option<f64>| CriteriaReport {
            model: name.into(),
            aic: Some(aic),
            bic: Some(aic + 1.0),
            caic: Some(aic + 2.0),
            qic: Some(1.0),
            dic: None,
            bpic: None,
            log_ppd: ppd,
            log_ppd_se: None,
            df: 3,
            n: 10,
            negative_pd: false,
        };
        let rows = table_rows(&[mk("a", 10.0, Some(-5.0)), mk("b", 9.0, Some(-7.0))], true);
        assert_eq!(rows[0], CSV_HEADER.map(String::from).to_vec());
        assert_eq!(rows[1].len(), 9);
        assert_eq!(rows[2][1], "9.00*");
        assert_eq!(rows[1][1], "10.00");
        assert_eq!(rows[1][7], "-5.00*");
        assert_eq!(rows[1][5], "-");
        // ties both get a star
        assert!(rows[1][4].ends_with('*') && rows[2][4].ends_with('*'));
    }

    #[test]
    fn nested_poisson_fits_do_not_lose_likelihood() {
        let mut rng = seeded_rng(12);
        let rows: Vec<Vec<f64>> = (0..300).map(|_| vec![rng.random::<f64>(), rng.random::<f64>()]).collect();
        let y: Vec<u64> = rows
            .iter()
            .map(|r| rand_distr::Poisson::new((0.3 + r[0]).exp()).unwrap().sample(&mut rng) as u64)
            .collect();
        let full = Dataset::from_covariates(y, &rows, &["a".into(), "b".into()]).unwrap();
        let small = full.select_columns(&[0, 1]).unwrap();
        let tiny = full.select_columns(&[0]).unwrap();
        let ll = |d: &Dataset| baseline::fit_poisson_baseline(d).unwrap().log_likelihood;
        assert!(ll(&tiny) <= ll(&small) + 1e-9);
        assert!(ll(&small) <= ll(&full) + 1e-9);
    }
}
