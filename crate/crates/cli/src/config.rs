//! Command-line arguments and the optional TOML run file. Flags override
//! values from the file, which override the built-in defaults.

use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use dwreg::mcmc::ChainConfig;
use dwreg::priors::{PriorKind, PriorSpec};
use dwreg::{ModelSpec, QLink};
use serde::{Deserialize, Serialize};

use crate::error::{CliError, Result};

#[derive(Debug, Parser)]
#[command(name = "dwreg", version, about = "Bayesian discrete Weibull regression for count data")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Sample the posterior of a DW regression and write chain, summary,
    /// criteria and density files.
    Fit(FitArgs),
    /// Generate a synthetic dataset with its truth sidecar.
    Simulate(SimulateArgs),
    /// Merge the criteria of several fit directories into one table.
    Criteria(CriteriaArgs),
    /// Recompute the summary table of an existing fit directory.
    Summarize(SummarizeArgs),
}

#[derive(Debug, Args, Default)]
pub struct FitArgs {
    /// TOML run file; flags take precedence over its values.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub data: Option<PathBuf>,
    #[arg(long)]
    pub response: Option<String>,
    /// Comma-separated covariate columns (default: every other column).
    #[arg(long, value_delimiter = ',')]
    pub covariates: Option<Vec<String>>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub iters: Option<usize>,
    /// Burn-in fraction of the iterations.
    #[arg(long)]
    pub burnin: Option<f64>,
    /// Target acceptance band as `low,high`.
    #[arg(long, value_parser = parse_band)]
    pub band: Option<(f64, f64)>,
    #[arg(long)]
    pub thin: Option<usize>,
    #[arg(long)]
    pub link: Option<QLink>,
    #[arg(long, overrides_with = "no_reg_q")]
    pub reg_q: bool,
    #[arg(long)]
    pub no_reg_q: bool,
    #[arg(long, overrides_with = "no_reg_beta")]
    pub reg_beta: bool,
    #[arg(long)]
    pub no_reg_beta: bool,
    #[arg(long)]
    pub prior: Option<PriorKind>,
    #[arg(long)]
    pub hyper_a: Option<f64>,
    #[arg(long)]
    pub hyper_b: Option<f64>,
    /// Apply the Laplace prior to intercepts too.
    #[arg(long)]
    pub penalize_intercepts: bool,
    /// Z-score the covariates before fitting.
    #[arg(long)]
    pub standardize: bool,
    /// HPD level for the summary table.
    #[arg(long)]
    pub level: Option<f64>,
    /// Prior draws for log(PPD); 0 disables it.
    #[arg(long)]
    pub ppd_draws: Option<usize>,
    /// Also fit frequentist Poisson and NB baselines.
    #[arg(long)]
    pub baselines: bool,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

fn parse_band(s: &str) -> std::result::Result<(f64, f64), String> {
    let parts: Vec<&str> = s.split(',').collect();
    if parts.len() != 2 {
        return Err(format!("expected 'low,high', got '{s}'"));
    }
    let p = |v: &str| v.trim().parse::<f64>().map_err(|e| format!("'{v}': {e}"));
    Ok((p(parts[0])?, p(parts[1])?))
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    /// case1..case6, poisson_misspec, nb_misspec or varsel.
    #[arg(long)]
    pub scenario: String,
    #[arg(long, default_value_t = 500)]
    pub n: usize,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    /// Number of covariates (varsel).
    #[arg(long, default_value_t = 50)]
    pub p: usize,
    /// Fraction of zero slopes (varsel).
    #[arg(long, default_value_t = 0.75)]
    pub frac_zero: f64,
    /// Sparse side for varsel: `regq`, `regbeta` or `both`.
    #[arg(long, default_value = "regq")]
    pub variant: String,
    /// Fixed beta for `--variant regq`.
    #[arg(long, default_value_t = 0.8)]
    pub beta: f64,
    /// Fixed q for `--variant regbeta`.
    #[arg(long, default_value_t = 0.85)]
    pub q: f64,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct CriteriaArgs {
    /// Fit output directories.
    #[arg(required = true)]
    pub fits: Vec<PathBuf>,
    /// Write the table here instead of standard output.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SummarizeArgs {
    /// Fit output directory holding chain.csv.
    pub fit: PathBuf,
    #[arg(long, default_value_t = dwreg::posterior::DEFAULT_LEVEL)]
    pub level: f64,
    /// Directory for summary.csv/json (defaults to the fit directory).
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    #[serde(default)]
    pub data: DataSection,
    #[serde(default)]
    pub model: ModelSection,
    #[serde(default)]
    pub prior: PriorSection,
    #[serde(default)]
    pub chain: ChainSection,
    #[serde(default)]
    pub output: OutputSection,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DataSection {
    pub path: Option<PathBuf>,
    pub response: Option<String>,
    pub covariates: Option<Vec<String>>,
    pub standardize: Option<bool>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelSection {
    pub link: Option<QLink>,
    pub reg_q: Option<bool>,
    pub reg_beta: Option<bool>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PriorSection {
    pub kind: Option<PriorKind>,
    pub hyper_a: Option<f64>,
    pub hyper_b: Option<f64>,
    pub penalize_intercepts: Option<bool>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChainSection {
    pub iterations: Option<usize>,
    pub burnin: Option<f64>,
    pub band: Option<(f64, f64)>,
    pub seed: Option<u64>,
    pub thin: Option<usize>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSection {
    pub dir: Option<PathBuf>,
    pub level: Option<f64>,
    pub ppd_draws: Option<usize>,
    pub baselines: Option<bool>,
}

pub fn read_file_config(path: &Path) -> Result<FileConfig> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    toml::from_str(&text).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))
}

/// Fully resolved settings of one `fit` run.
#[derive(Debug, Clone, Serialize)]
pub struct FitConfig {
    pub data_path: PathBuf,
    pub response: String,
    pub covariates: Option<Vec<String>>,
    pub standardize: bool,
    pub model: ModelSpec,
    pub prior: PriorSpec,
    pub chain: ChainConfig,
    pub out: PathBuf,
    pub level: f64,
    pub ppd_draws: usize,
    pub baselines: bool,
}

fn flag_pair(on: bool, off: bool) -> Option<bool> {
    match (on, off) {
        (true, _) => Some(true),
        (_, true) => Some(false),
        _ => None,
    }
}

fn required<T>(v: Option<T>, what: &str) -> Result<T> {
    v.ok_or_else(|| CliError::Usage(format!("missing {what} (flag or config file)")))
}

impl FitConfig {
    pub fn resolve(args: &FitArgs) -> Result<Self> {
        let file = match &args.config {
            Some(p) => read_file_config(p)?,
            None => FileConfig::default(),
        };
        let defaults = ChainConfig::default();
        let model = ModelSpec::new(
            args.link.or(file.model.link).unwrap_or(QLink::Logit),
            flag_pair(args.reg_q, args.no_reg_q).or(file.model.reg_q).unwrap_or(true),
            flag_pair(args.reg_beta, args.no_reg_beta)
                .or(file.model.reg_beta)
                .unwrap_or(false),
        );
        let kind = args.prior.or(file.prior.kind).unwrap_or(PriorKind::Flat);
        let prior = PriorSpec {
            kind,
            hyper_a: args.hyper_a.or(file.prior.hyper_a).unwrap_or(2.0),
            hyper_b: args.hyper_b.or(file.prior.hyper_b).unwrap_or(1.0),
            penalize_intercepts: args.penalize_intercepts
                || file.prior.penalize_intercepts.unwrap_or(false),
        };
        prior.validate()?;
        let chain = ChainConfig {
            iterations: args.iters.or(file.chain.iterations).unwrap_or(defaults.iterations),
            burnin_fraction: args.burnin.or(file.chain.burnin).unwrap_or(defaults.burnin_fraction),
            target_band: args.band.or(file.chain.band).unwrap_or(defaults.target_band),
            seed: args.seed.or(file.chain.seed).unwrap_or(defaults.seed),
            thin: args.thin.or(file.chain.thin).unwrap_or(defaults.thin),
            ..defaults
        };
        chain.validate()?;
        let level = args.level.or(file.output.level).unwrap_or(dwreg::posterior::DEFAULT_LEVEL);
        if !(level > 0.0 && level < 1.0) {
            return Err(CliError::Usage(format!("level must lie in (0, 1), got {level}")));
        }
        Ok(Self {
            data_path: required(args.data.clone().or(file.data.path), "--data")?,
            response: required(args.response.clone().or(file.data.response), "--response")?,
            covariates: args.covariates.clone().or(file.data.covariates),
            standardize: args.standardize || file.data.standardize.unwrap_or(false),
            model,
            prior,
            chain,
            out: required(args.out.clone().or(file.output.dir), "--out")?,
            level,
            ppd_draws: args
                .ppd_draws
                .or(file.output.ppd_draws)
                .unwrap_or(dwreg::criteria::DEFAULT_PPD_DRAWS),
            baselines: args.baselines || file.output.baselines.unwrap_or(false),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn band_parsing() {
        assert_eq!(parse_band("0.2,0.3").unwrap(), (0.2, 0.3));
        assert!(parse_band("0.2").is_err());
        assert!(parse_band("a,b").is_err());
    }

    #[test]
    fn flags_override_file() {
        let dir = std::env::temp_dir().join(format!("dwreg-cfg-{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("run.toml");
        std::fs::write(
            &path,
            "[data]\npath = \"d.csv\"\nresponse = \"y\"\n[model]\nlink = \"loglog\"\nreg_beta = true\n\
             [chain]\niterations = 5000\nseed = 9\n[output]\ndir = \"out\"\n",
        )
        .unwrap();
        let args = FitArgs {
            config: Some(path.clone()),
            seed: Some(3),
            no_reg_beta: true,
            ..Default::default()
        };
        let cfg = FitConfig::resolve(&args).unwrap();
        assert_eq!(cfg.model.q_link, QLink::LogLog);
        assert!(!cfg.model.beta_regressed);
        assert!(cfg.model.q_regressed);
        assert_eq!(cfg.chain.iterations, 5000);
        assert_eq!(cfg.chain.seed, 3);
        assert_eq!(cfg.out, PathBuf::from("out"));
        std::fs::remove_dir_all(dir).unwrap();
    }

    #[test]
    fn missing_required_values_are_usage_errors() {
        let err = FitConfig::resolve(&FitArgs::default()).unwrap_err();
        assert_eq!(err.exit_code(), 1);
    }
}
