//! Random-walk Metropolis-Hastings with burn-in scale tuning.
//!
//! All free coefficients are moved jointly by an independent-coordinate
//! Gaussian random walk. During burn-in the proposal scales are multiplied by
//! 1.1 or 0.9 after every tuning window whose acceptance rate falls above or
//! below the target band; after burn-in they are frozen so that the kept draws
//! come from a fixed Markov kernel. Under the Laplace prior the shrinkage
//! rates are refreshed by exact Gibbs draws after every MH step.

use std::sync::Arc;

use rand::Rng;
use rand_distr::StandardNormal;
use rustfft::{num_complex::Complex, FftPlanner};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::priors::{self, HyperState, PriorKind, PriorSpec};
use crate::regression::{self, Dataset, ModelSpec, RegressionParams};
use crate::{seeded_rng, SeededRng};

pub const AUTO_SCALE: f64 = 0.1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum InitialScales {
    Auto,
    Fixed(Vec<f64>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChainConfig {
    pub iterations: usize,
    pub burnin_fraction: f64,
    pub target_band: (f64, f64),
    pub seed: u64,
    pub thin: usize,
    pub initial_scales: InitialScales,
    /// Iterations per tuning window during burn-in.
    pub tune_window: usize,
}

impl Default for ChainConfig {
    fn default() -> Self {
        Self {
            iterations: 25_000,
            burnin_fraction: 0.25,
            target_band: (0.22, 0.25),
            seed: 1,
            thin: 1,
            initial_scales: InitialScales::Auto,
            tune_window: 500,
        }
    }
}

impl ChainConfig {
    pub fn validate(&self) -> Result<()> {
        let (lo, hi) = self.target_band;
        let problem = if self.iterations < 1000 {
            Some(format!("iterations must be >= 1000, got {}", self.iterations))
        } else if !(self.burnin_fraction > 0.0 && self.burnin_fraction < 1.0) {
            Some(format!("burn-in fraction must lie in (0, 1), got {}", self.burnin_fraction))
        } else if !(0.0 < lo && lo < hi && hi < 1.0) {
            Some(format!("acceptance band must satisfy 0 < low < high < 1, got ({lo}, {hi})"))
        } else if self.thin == 0 {
            Some("thin must be >= 1".to_string())
        } else if self.tune_window == 0 {
            Some("tuning window must be >= 1".to_string())
        } else if let InitialScales::Fixed(s) = &self.initial_scales {
            s.iter()
                .any(|v| !(*v > 0.0 && v.is_finite()))
                .then(|| "initial scales must be positive".to_string())
        } else {
            None
        };
        problem.map_or(Ok(()), |p| Err(Error::InvalidConfig(p)))
    }

    /// Post-burn-in iterations, `floor(iterations * (1 - burnin_fraction))`.
    pub fn post_burnin(&self) -> usize {
        ((self.iterations as f64) * (1.0 - self.burnin_fraction) + 1e-9).floor() as usize
    }

    pub fn burnin(&self) -> usize {
        self.iterations - self.post_burnin()
    }

    /// Number of stored rows, `post_burnin / thin` (integer division).
    pub fn kept_rows(&self) -> usize {
        self.post_burnin() / self.thin
    }

    fn scales(&self, dim: usize) -> Result<Vec<f64>> {
        match &self.initial_scales {
            InitialScales::Auto => Ok(vec![AUTO_SCALE; dim]),
            InitialScales::Fixed(s) if s.len() == dim => Ok(s.clone()),
            InitialScales::Fixed(s) => Err(Error::DimensionMismatch {
                expected: dim,
                found: s.len(),
            }),
        }
    }
}

/// Log density and log-likelihood at one point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Evaluation {
    pub log_density: f64,
    pub log_likelihood: f64,
}

impl Evaluation {
    pub fn density_only(log_density: f64) -> Self {
        Self {
            log_density,
            log_likelihood: log_density,
        }
    }
}

/// A target for the random-walk sampler.
pub trait Target {
    fn evaluate(&mut self, x: &[f64]) -> Evaluation;

    /// Gibbs updates of auxiliary variables at the current position; returns
    /// the re-evaluated target there.
    fn refresh(&mut self, _x: &[f64], current: Evaluation, _rng: &mut SeededRng) -> Evaluation {
        current
    }

    /// Auxiliary values recorded after the coefficients in each kept row.
    fn auxiliary(&self) -> Vec<f64> {
        Vec::new()
    }
}

impl<F: FnMut(&[f64]) -> f64> Target for F {
    fn evaluate(&mut self, x: &[f64]) -> Evaluation {
        Evaluation::density_only(self(x))
    }
}

#[derive(Debug, Clone)]
pub struct RwmState {
    pub position: Vec<f64>,
    pub current: Evaluation,
    pub scales: Vec<f64>,
}

/// One random-walk Metropolis step; returns whether the proposal was accepted.
///
/// The proposal `x + scales * N(0, I)` is symmetric, so the acceptance
/// probability is `min(1, exp(delta log density))`.
pub fn mh_step<T: Target + ?Sized, R: Rng + ?Sized>(
    state: &mut RwmState,
    target: &mut T,
    rng: &mut R,
) -> bool {
    let proposal: Vec<f64> = state
        .position
        .iter()
        .zip(&state.scales)
        .map(|(x, s)| x + s * rng.sample::<f64, _>(StandardNormal))
        .collect();
    let eval = target.evaluate(&proposal);
    let delta = eval.log_density - state.current.log_density;
    if delta.is_nan() {
        return false;
    }
    let accept = delta >= 0.0 || rng.random::<f64>().ln() < delta;
    if accept {
        state.position = proposal;
        state.current = eval;
    }
    accept
}

/// Scales multiplied by 1.1 above the band, 0.9 below it, unchanged inside.
pub fn tune_scales(window_acceptance: f64, scales: &[f64], band: (f64, f64)) -> Vec<f64> {
    let factor = if window_acceptance > band.1 {
        1.1
    } else if window_acceptance < band.0 {
        0.9
    } else {
        1.0
    };
    scales.iter().map(|s| s * factor).collect()
}

/// Raw output of the generic sampler.
#[derive(Debug, Clone)]
pub struct RwmRun {
    /// Kept rows: position followed by the target's auxiliary values.
    pub samples: Vec<Vec<f64>>,
    pub loglik_trace: Vec<f64>,
    /// Post-burn-in acceptance fraction.
    pub acceptance_rate: f64,
    pub burnin_acceptance_rate: f64,
    pub tuned_scales: Vec<f64>,
    /// `(iteration, scales)` after every scale change.
    pub scale_history: Vec<(usize, Vec<f64>)>,
}

/// Runs the random-walk sampler on an arbitrary target from `init`.
pub fn run_random_walk<T: Target + ?Sized>(
    target: &mut T,
    init: &[f64],
    config: &ChainConfig,
) -> Result<RwmRun> {
    config.validate()?;
    let mut rng = seeded_rng(config.seed);
    let first = target.evaluate(init);
    if !first.log_density.is_finite() {
        return Err(Error::BadInitialization {
            value: first.log_density,
            detail: format!("at {init:?}"),
        });
    }
    let mut state = RwmState {
        position: init.to_vec(),
        current: first,
        scales: config.scales(init.len())?,
    };
    let burnin = config.burnin();
    let mut samples = Vec::with_capacity(config.kept_rows());
    let mut loglik_trace = Vec::with_capacity(config.kept_rows());
    let mut scale_history = Vec::new();
    let (mut window_accepts, mut burn_accepts, mut kept_accepts) = (0usize, 0usize, 0usize);

    for iter in 1..=config.iterations {
        let accepted = mh_step(&mut state, target, &mut rng);
        state.current = target.refresh(&state.position, state.current, &mut rng);

        if iter <= burnin {
            burn_accepts += accepted as usize;
            window_accepts += accepted as usize;
            if iter % config.tune_window == 0 {
                let rate = window_accepts as f64 / config.tune_window as f64;
                let tuned = tune_scales(rate, &state.scales, config.target_band);
                if tuned != state.scales {
                    state.scales = tuned;
                    scale_history.push((iter, state.scales.clone()));
                }
                window_accepts = 0;
            }
        } else {
            kept_accepts += accepted as usize;
            if (iter - burnin) % config.thin == 0 {
                let mut row = state.position.clone();
                row.extend(target.auxiliary());
                samples.push(row);
                loglik_trace.push(state.current.log_likelihood);
            }
        }
    }

    Ok(RwmRun {
        samples,
        loglik_trace,
        acceptance_rate: kept_accepts as f64 / (config.iterations - burnin) as f64,
        burnin_acceptance_rate: burn_accepts as f64 / burnin.max(1) as f64,
        tuned_scales: state.scales,
        scale_history,
    })
}

/// Posterior of a discrete Weibull regression as a sampler target.
struct DwPosterior<'a> {
    data: &'a Dataset,
    model: ModelSpec,
    prior: PriorSpec,
    hyper: HyperState,
    scratch: RegressionParams,
    n_theta: usize,
}

impl DwPosterior<'_> {
    fn load(&mut self, x: &[f64]) {
        self.scratch.theta.copy_from_slice(&x[..self.n_theta]);
        self.scratch.gamma.copy_from_slice(&x[self.n_theta..]);
    }
}

impl Target for DwPosterior<'_> {
    fn evaluate(&mut self, x: &[f64]) -> Evaluation {
        self.load(x);
        let ll = regression::log_likelihood(self.data, &self.scratch, &self.model);
        Evaluation {
            log_density: ll + priors::log_prior(&self.scratch, &self.hyper, &self.prior),
            log_likelihood: ll,
        }
    }

    fn refresh(&mut self, x: &[f64], current: Evaluation, rng: &mut SeededRng) -> Evaluation {
        if self.prior.kind == PriorKind::Flat {
            return current;
        }
        self.load(x);
        let (a, b) = (self.prior.hyper_a, self.prior.hyper_b);
        self.hyper.lambda = priors::gibbs_update_rate(self.prior.penalized_theta(&self.scratch), a, b, rng);
        self.hyper.tau = priors::gibbs_update_rate(self.prior.penalized_gamma(&self.scratch), a, b, rng);
        Evaluation {
            log_density: current.log_likelihood
                + priors::log_prior(&self.scratch, &self.hyper, &self.prior),
            log_likelihood: current.log_likelihood,
        }
    }

    fn auxiliary(&self) -> Vec<f64> {
        match self.prior.kind {
            PriorKind::Flat => Vec::new(),
            PriorKind::Laplace => vec![self.hyper.lambda, self.hyper.tau],
        }
    }
}

/// Where the chain started.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum InitSource {
    Mle,
    Marginal,
    User,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ChainOutput {
    /// Column labels: coefficients, then `lambda` and `tau` for the Laplace prior.
    pub names: Vec<String>,
    pub n_coefficients: usize,
    pub samples: Vec<Vec<f64>>,
    pub loglik_trace: Vec<f64>,
    pub acceptance_rate: f64,
    pub burnin_acceptance_rate: f64,
    pub tuned_scales: Vec<f64>,
    /// Last burn-in iteration at which the scales changed (0 if never).
    pub scales_frozen_after: usize,
    pub seed: u64,
    pub config: ChainConfig,
    pub model: ModelSpec,
    pub prior: PriorSpec,
    pub initial: Vec<f64>,
    pub init_source: InitSource,
}

impl ChainOutput {
    pub fn column(&self, j: usize) -> Vec<f64> {
        self.samples.iter().map(|r| r[j]).collect()
    }

    pub fn n_rows(&self) -> usize {
        self.samples.len()
    }

    /// Coefficients of row `i` as regression parameters.
    pub fn params_at(&self, i: usize, ncols: usize) -> Result<RegressionParams> {
        RegressionParams::from_slice(&self.model, ncols, &self.samples[i][..self.n_coefficients])
    }

    /// Column-wise posterior mean of the coefficients.
    pub fn posterior_mean(&self, ncols: usize) -> Result<RegressionParams> {
        let n = self.n_rows() as f64;
        let means: Vec<f64> = (0..self.n_coefficients)
            .map(|j| self.samples.iter().map(|r| r[j]).sum::<f64>() / n)
            .collect();
        RegressionParams::from_slice(&self.model, ncols, &means)
    }
}

/// Initial coefficients: the MLE when it converges, otherwise the marginal
/// intercepts with zero slopes.
pub fn initial_coefficients(data: &Dataset, model: &ModelSpec) -> (RegressionParams, InitSource) {
    match regression::mle_fit(data, model) {
        Ok(fit) if fit.converged && fit.log_likelihood.is_finite() => (fit.params, InitSource::Mle),
        _ => (regression::initial_params(data, model), InitSource::Marginal),
    }
}

/// Samples the posterior of a discrete Weibull regression.
pub fn run_chain(
    data: &Dataset,
    model: &ModelSpec,
    prior: &PriorSpec,
    config: &ChainConfig,
) -> Result<ChainOutput> {
    config.validate()?;
    prior.validate()?;
    let (start, source) = initial_coefficients(data, model);
    run_chain_from(data, model, prior, config, &start, source)
}

/// As [`run_chain`] but from explicit starting coefficients.
pub fn run_chain_from(
    data: &Dataset,
    model: &ModelSpec,
    prior: &PriorSpec,
    config: &ChainConfig,
    start: &RegressionParams,
    init_source: InitSource,
) -> Result<ChainOutput> {
    config.validate()?;
    prior.validate()?;
    start.check(model, data.ncols())?;
    let mut target = DwPosterior {
        data,
        model: *model,
        prior: *prior,
        hyper: prior.hyper_mean(),
        scratch: start.clone(),
        n_theta: start.theta.len(),
    };
    let init = start.to_vec();
    let run = run_random_walk(&mut target, &init, config)?;

    let mut names = regression::parameter_names(model, data.names());
    if prior.kind == PriorKind::Laplace {
        names.push("lambda".into());
        names.push("tau".into());
    }
    Ok(ChainOutput {
        names,
        n_coefficients: init.len(),
        samples: run.samples,
        loglik_trace: run.loglik_trace,
        acceptance_rate: run.acceptance_rate,
        burnin_acceptance_rate: run.burnin_acceptance_rate,
        tuned_scales: run.tuned_scales,
        scales_frozen_after: run.scale_history.last().map_or(0, |h| h.0),
        seed: config.seed,
        config: config.clone(),
        model: *model,
        prior: *prior,
        initial: init,
        init_source,
    })
}

/// Runs independent chains with seeds `seed + k`.
pub fn run_chains(
    data: &Dataset,
    model: &ModelSpec,
    prior: &PriorSpec,
    config: &ChainConfig,
    n_chains: usize,
) -> Result<Vec<ChainOutput>> {
    let (start, source) = initial_coefficients(data, model);
    let data = Arc::new(data.clone());
    std::thread::scope(|s| {
        let handles: Vec<_> = (0..n_chains as u64)
            .map(|k| {
                let cfg = ChainConfig {
                    seed: config.seed.wrapping_add(k),
                    ..config.clone()
                };
                let data = Arc::clone(&data);
                let start = start.clone();
                s.spawn(move || run_chain_from(&data, model, prior, &cfg, &start, source))
            })
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("chain thread panicked"))
            .collect()
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Ess {
    pub ess: f64,
    /// The trace was constant; `ess` is reported as 0.
    pub constant: bool,
}

/// Normalised autocorrelations `rho_0..rho_{n-1}` via zero-padded FFT.
fn autocorrelation(trace: &[f64]) -> Vec<f64> {
    let n = trace.len();
    let mean = trace.iter().sum::<f64>() / n as f64;
    let size = (2 * n).next_power_of_two();
    let mut buf: Vec<Complex<f64>> = trace
        .iter()
        .map(|&v| Complex::new(v - mean, 0.0))
        .chain(std::iter::repeat(Complex::new(0.0, 0.0)))
        .take(size)
        .collect();
    let mut planner = FftPlanner::new();
    planner.plan_fft_forward(size).process(&mut buf);
    for c in buf.iter_mut() {
        *c = Complex::new(c.norm_sqr(), 0.0);
    }
    planner.plan_fft_inverse(size).process(&mut buf);
    let c0 = buf[0].re;
    buf[..n].iter().map(|c| c.re / c0).collect()
}

/// Effective sample size with Geyer's initial positive sequence: sums of
/// adjacent autocorrelation pairs are accumulated until the first
/// non-positive pair. Capped at the trace length.
pub fn effective_sample_size(trace: &[f64]) -> Result<Ess> {
    if trace.len() < 100 {
        return Err(Error::TooFewSamples {
            needed: 100,
            found: trace.len(),
        });
    }
    let n = trace.len();
    let first = trace[0];
    if trace.iter().all(|&v| v == first) {
        return Ok(Ess {
            ess: 0.0,
            constant: true,
        });
    }
    let rho = autocorrelation(trace);
    let mut sum_pairs = 0.0;
    let mut k = 0;
    while 2 * k + 1 < n {
        let pair = rho[2 * k] + rho[2 * k + 1];
        if pair <= 0.0 {
            break;
        }
        sum_pairs += pair;
        k += 1;
    }
    let tau = -1.0 + 2.0 * sum_pairs;
    let ess = if tau <= 1.0 { n as f64 } else { n as f64 / tau };
    Ok(Ess {
        ess: ess.min(n as f64),
        constant: false,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::regression::QLink;

    #[test]
    fn tuning_rule() {
        let s = [0.1, 0.2];
        let band = (0.22, 0.25);
        let up = tune_scales(0.5, &s, band);
        assert!((up[0] - 0.11).abs() < 1e-15 && (up[1] - 0.22).abs() < 1e-15);
        let down = tune_scales(0.1, &s, band);
        assert!((down[0] - 0.09).abs() < 1e-15);
        assert_eq!(tune_scales(0.23, &s, band), s.to_vec());
    }

    #[test]
    fn uphill_moves_always_accepted() {
        // density increasing in x; any proposal that lands higher must be kept
        let mut target = |x: &[f64]| x[0];
        let mut rng = seeded_rng(4);
        for _ in 0..200 {
            let mut state = RwmState {
                position: vec![0.0],
                current: Evaluation::density_only(0.0),
                scales: vec![1.0],
            };
            let before = state.position[0];
            let accepted = mh_step(&mut state, &mut target, &mut rng);
            if state.position[0] > before {
                assert!(accepted);
            }
        }
    }

    #[test]
    fn small_scales_accept_almost_everything() {
        let mut target = |x: &[f64]| -0.5 * x[0] * x[0];
        let cfg = ChainConfig {
            iterations: 4000,
            initial_scales: InitialScales::Fixed(vec![1e-6]),
            target_band: (0.001, 0.999),
            ..Default::default()
        };
        let run = run_random_walk(&mut target, &[0.3], &cfg).unwrap();
        assert!(run.acceptance_rate > 0.99);
    }

    #[test]
    fn standard_normal_target() {
        let mut target = |x: &[f64]| -0.5 * x[0] * x[0];
        let cfg = ChainConfig {
            iterations: 200_000,
            burnin_fraction: 0.5,
            initial_scales: InitialScales::Fixed(vec![2.4]),
            target_band: (0.40, 0.50),
            seed: 99,
            ..Default::default()
        };
        let run = run_random_walk(&mut target, &[0.0], &cfg).unwrap();
        let xs: Vec<f64> = run.samples.iter().map(|r| r[0]).collect();
        assert_eq!(xs.len(), 100_000);
        let m = xs.iter().sum::<f64>() / xs.len() as f64;
        let v = xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / xs.len() as f64;
        assert!(m.abs() < 0.02, "mean {m}");
        assert!((v - 1.0).abs() < 0.05, "var {v}");
    }

    #[test]
    fn row_count_and_thinning() {
        let mut target = |x: &[f64]| -0.5 * x[0] * x[0];
        let cfg = ChainConfig {
            iterations: 1001,
            burnin_fraction: 0.3,
            thin: 3,
            ..Default::default()
        };
        // floor(1001 * 0.7) = 700, 700 / 3 = 233
        let run = run_random_walk(&mut target, &[0.0], &cfg).unwrap();
        assert_eq!(run.samples.len(), 233);
        assert_eq!(cfg.kept_rows(), 233);
    }

    #[test]
    fn scales_frozen_after_burnin() {
        let mut target = |x: &[f64]| -0.5 * x.iter().map(|v| v * v).sum::<f64>();
        let cfg = ChainConfig {
            iterations: 10_000,
            ..Default::default()
        };
        let run = run_random_walk(&mut target, &[0.0, 0.0], &cfg).unwrap();
        assert!(!run.scale_history.is_empty());
        assert!(run.scale_history.iter().all(|(it, _)| *it <= cfg.burnin()));
        assert_eq!(&run.scale_history.last().unwrap().1, &run.tuned_scales);
    }

    #[test]
    fn bad_initialization_is_reported() {
        let mut target = |_: &[f64]| f64::NEG_INFINITY;
        let err = run_random_walk(&mut target, &[0.0], &ChainConfig::default()).unwrap_err();
        assert!(matches!(err, Error::BadInitialization { .. }));
    }

    #[test]
    fn config_validation() {
        let bad = [
            ChainConfig { iterations: 10, ..Default::default() },
            ChainConfig { burnin_fraction: 1.0, ..Default::default() },
            ChainConfig { target_band: (0.3, 0.2), ..Default::default() },
            ChainConfig { thin: 0, ..Default::default() },
            ChainConfig { initial_scales: InitialScales::Fixed(vec![-1.0]), ..Default::default() },
        ];
        for c in bad {
            assert!(c.validate().is_err(), "{c:?}");
        }
    }

    fn small_data() -> Dataset {
        let draws = crate::DwParams::new(0.41, 1.1).unwrap().sample(200, &mut seeded_rng(2));
        Dataset::intercept_only(draws).unwrap()
    }

    #[test]
    fn chain_is_reproducible() {
        let data = small_data();
        let model = ModelSpec::new(QLink::Logit, false, false);
        let cfg = ChainConfig {
            iterations: 2000,
            seed: 17,
            ..Default::default()
        };
        let a = run_chain(&data, &model, &PriorSpec::flat(), &cfg).unwrap();
        let b = run_chain(&data, &model, &PriorSpec::flat(), &cfg).unwrap();
        assert_eq!(a.samples, b.samples);
        assert_eq!(a.loglik_trace, b.loglik_trace);
        assert_eq!(a.names, vec!["theta_intercept", "gamma_intercept"]);
        assert_eq!(a.init_source, InitSource::Mle);
    }

    #[test]
    fn laplace_chain_records_rates() {
        let data = small_data();
        let model = ModelSpec::new(QLink::Logit, false, false);
        let mut prior = PriorSpec::laplace(2.0, 1.0);
        prior.penalize_intercepts = true;
        let cfg = ChainConfig {
            iterations: 2000,
            ..Default::default()
        };
        let out = run_chain(&data, &model, &prior, &cfg).unwrap();
        assert_eq!(out.names.len(), 4);
        assert!(out.samples.iter().all(|r| r[2] > 0.0 && r[3] > 0.0));
        // loglik trace is the likelihood, not the posterior
        for (row, ll) in out.samples.iter().zip(&out.loglik_trace).take(20) {
            let p = RegressionParams::from_slice(&model, 1, &row[..2]).unwrap();
            assert!((regression::log_likelihood(&data, &p, &model) - ll).abs() < 1e-9);
        }
    }

    #[test]
    fn parallel_chains_use_offset_seeds() {
        let data = small_data();
        let model = ModelSpec::new(QLink::Logit, false, false);
        let cfg = ChainConfig {
            iterations: 1000,
            seed: 5,
            ..Default::default()
        };
        let chains = run_chains(&data, &model, &PriorSpec::flat(), &cfg, 2).unwrap();
        let second = run_chain(
            &data,
            &model,
            &PriorSpec::flat(),
            &ChainConfig { seed: 6, ..cfg.clone() },
        )
        .unwrap();
        assert_eq!(chains[1].samples, second.samples);
        assert_ne!(chains[0].samples, chains[1].samples);
    }

    fn normals(n: usize, seed: u64) -> Vec<f64> {
        let mut rng = seeded_rng(seed);
        (0..n).map(|_| rng.sample::<f64, _>(StandardNormal)).collect()
    }

    #[test]
    fn ess_iid() {
        let e = effective_sample_size(&normals(10_000, 3)).unwrap();
        assert!(e.ess >= 8.5e3 && e.ess <= 1.05e4, "{}", e.ess);
    }

    #[test]
    fn ess_alternating_is_capped() {
        let trace: Vec<f64> = (0..1000).map(|i| if i % 2 == 0 { 1.0 } else { -1.0 }).collect();
        assert_eq!(effective_sample_size(&trace).unwrap().ess, 1000.0);
    }

    #[test]
    fn ess_ar1() {
        let n = 100_000;
        let eps = normals(n, 8);
        let mut x = vec![0.0; n];
        for t in 1..n {
            x[t] = 0.9 * x[t - 1] + eps[t];
        }
        let want = n as f64 * 0.1 / 1.9;
        let got = effective_sample_size(&x).unwrap().ess;
        assert!((got - want).abs() < 0.2 * want, "{got} vs {want}");
    }

    #[test]
    fn ess_edge_cases() {
        let e = effective_sample_size(&[2.0; 500]).unwrap();
        assert!(e.constant && e.ess == 0.0);
        assert!(effective_sample_size(&[1.0; 50]).is_err());
    }
}
