use std::path::Path;
use std::time::Instant;

use dwreg::baseline;
use dwreg::criteria::{self, CriteriaReport};
use dwreg::mcmc::{self, InitSource};
use dwreg::posterior::{self, ParameterSummary};
use dwreg::simulation::{self, RegressionCase, VarselVariant};
use dwreg::{seeded_rng, Dataset};
use serde::Serialize;

use crate::config::{CriteriaArgs, FitConfig, SimulateArgs, SummarizeArgs};
use crate::error::{CliError, Result};
use crate::ingest::{ingest_csv, write_dataset_csv};
use crate::output::{self, Artifacts};

#[derive(Debug, Serialize)]
struct FitMeta<'a> {
    version: &'static str,
    config: &'a FitConfig,
    model_label: String,
    n: usize,
    dropped_rows: usize,
    covariates: &'a [String],
    parameter_names: &'a [String],
    kept_rows: usize,
    acceptance_rate: f64,
    burnin_acceptance_rate: f64,
    tuned_scales: &'a [f64],
    scales_frozen_after: usize,
    init_source: InitSource,
    initial: &'a [f64],
    runtime_seconds: f64,
}

/// File name for a parameter's density curve.
pub fn density_file(name: &str) -> String {
    let safe: String = name
        .chars()
        .map(|c| if c.is_ascii_alphanumeric() || c == '_' || c == '-' { c } else { '_' })
        .collect();
    format!("{}/{safe}.csv", output::DENSITY_DIR)
}

fn summaries_from_columns(names: &[String], cols: &[Vec<f64>], level: f64) -> Result<Vec<ParameterSummary>> {
    names
        .iter()
        .zip(cols)
        .map(|(n, c)| posterior::summarize_column(n, c, level).map_err(CliError::from))
        .collect()
}

fn write_summary(art: &mut Artifacts, summaries: &[ParameterSummary]) -> Result<()> {
    art.write_rows(output::SUMMARY_CSV, &output::summary_rows(summaries))?;
    art.write_json(output::SUMMARY_JSON, &summaries)?;
    Ok(())
}

fn baseline_reports(data: &Dataset) -> Vec<CriteriaReport> {
    let mut out = Vec::new();
    match baseline::fit_poisson_baseline(data).and_then(|f| criteria::poisson_report(data, &f)) {
        Ok(r) => out.push(r),
        Err(e) => eprintln!("warning: Poisson baseline skipped: {e}"),
    }
    match baseline::fit_nb_baseline(data).and_then(|f| criteria::nb_report(data, &f)) {
        Ok(r) => out.push(r),
        Err(e) => eprintln!("warning: NB baseline skipped: {e}"),
    }
    out
}

pub fn cmd_fit(cfg: &FitConfig) -> Result<()> {
    let started = Instant::now();
    let ingested = ingest_csv(&cfg.data_path, &cfg.response, cfg.covariates.as_deref())?;
    if ingested.dropped_rows > 0 {
        eprintln!(
            "warning: dropped {} row(s) with missing values in used columns",
            ingested.dropped_rows
        );
    }
    let data = if cfg.standardize {
        ingested.dataset.standardized()
    } else {
        ingested.dataset.clone()
    };
    let mut art = Artifacts::new(&cfg.out)?;

    let chain = mcmc::run_chain(&data, &cfg.model, &cfg.prior, &cfg.chain)?;
    art.write_rows(output::CHAIN_FILE, &output::chain_rows(&chain))?;

    let cols: Vec<Vec<f64>> = (0..chain.names.len()).map(|j| chain.column(j)).collect();
    let summaries = summaries_from_columns(&chain.names, &cols, cfg.level)?;
    write_summary(&mut art, &summaries)?;

    art.subdir(output::DENSITY_DIR)?;
    for (name, col) in chain.names.iter().zip(&cols) {
        let curve = posterior::kde_curve(col, posterior::KDE_GRID)?;
        let mut rows = vec![vec!["x".to_string(), "density".to_string()]];
        rows.extend(curve.iter().map(|(x, d)| vec![x.to_string(), d.to_string()]));
        art.write_rows(&density_file(name), &rows)?;
    }

    let mut ppd_rng = seeded_rng(cfg.chain.seed.wrapping_add(1));
    let mut reports = vec![criteria::bayesian_report(&data, &chain, cfg.ppd_draws, &mut ppd_rng)?];
    if cfg.baselines {
        reports.extend(baseline_reports(&data));
    }
    art.write_rows(output::CRITERIA_CSV, &criteria::table_rows(&reports, false))?;
    art.write_json(output::CRITERIA_JSON, &reports)?;

    let meta = FitMeta {
        version: env!("CARGO_PKG_VERSION"),
        config: cfg,
        model_label: cfg.model.label(),
        n: data.n(),
        dropped_rows: ingested.dropped_rows,
        covariates: &ingested.covariates,
        parameter_names: &chain.names,
        kept_rows: chain.n_rows(),
        acceptance_rate: chain.acceptance_rate,
        burnin_acceptance_rate: chain.burnin_acceptance_rate,
        tuned_scales: &chain.tuned_scales,
        scales_frozen_after: chain.scales_frozen_after,
        init_source: chain.init_source,
        initial: &chain.initial,
        runtime_seconds: started.elapsed().as_secs_f64(),
    };
    art.write_json(output::META_FILE, &meta)?;
    art.commit();
    eprintln!(
        "fit {}: n = {}, acceptance {:.3}, output in {}",
        cfg.model.label(),
        data.n(),
        chain.acceptance_rate,
        cfg.out.display()
    );
    Ok(())
}

#[derive(Debug, Serialize)]
struct SimTruth<T: Serialize> {
    scenario: String,
    n: usize,
    seed: u64,
    truth: T,
}

pub const SIM_DATA_FILE: &str = "data.csv";
pub const SIM_TRUTH_FILE: &str = "truth.json";

pub fn cmd_simulate(args: &SimulateArgs) -> Result<()> {
    let scenario = args.scenario.to_ascii_lowercase();
    let (data, truth) = if let Some(i) = scenario.strip_prefix("case") {
        let idx: usize = i
            .parse()
            .map_err(|_| CliError::Usage(format!("unknown scenario '{}'", args.scenario)))?;
        let case = RegressionCase::from_index(idx)?;
        let (d, t) = simulation::gen_dw_regression(case, args.n, args.seed)?;
        (d, to_value(&t)?)
    } else {
        match scenario.as_str() {
            "poisson_misspec" => {
                let (d, o) = simulation::gen_poisson_misspec(args.n, args.seed)?;
                (d, to_value(&o)?)
            }
            "nb_misspec" => {
                let (d, o) = simulation::gen_nb_misspec(args.n, args.seed)?;
                (d, to_value(&o)?)
            }
            "varsel" => {
                let variant = match args.variant.to_ascii_lowercase().as_str() {
                    "regq" => VarselVariant::RegQ { beta: args.beta },
                    "regbeta" => VarselVariant::RegBeta { q: args.q },
                    "both" => VarselVariant::RegQRegBeta,
                    other => return Err(CliError::Usage(format!("unknown varsel variant '{other}'"))),
                };
                let (d, t) = simulation::gen_varsel(args.n, args.p, args.frac_zero, variant, args.seed)?;
                (d, to_value(&t)?)
            }
            _ => return Err(CliError::Usage(format!("unknown scenario '{}'", args.scenario))),
        }
    };
    let mut art = Artifacts::new(&args.out)?;
    let data_path = art.register(SIM_DATA_FILE);
    write_dataset_csv(&data_path, &data, "y")?;
    art.write_json(
        SIM_TRUTH_FILE,
        &SimTruth {
            scenario,
            n: args.n,
            seed: args.seed,
            truth,
        },
    )?;
    art.commit();
    Ok(())
}

fn to_value<T: Serialize>(v: &T) -> Result<serde_json::Value> {
    serde_json::to_value(v).map_err(|e| CliError::Numerical(e.to_string()))
}

fn read_reports(dir: &Path) -> Result<Vec<CriteriaReport>> {
    let p = dir.join(output::CRITERIA_JSON);
    let text = std::fs::read_to_string(&p).map_err(|e| CliError::io(&p, e))?;
    serde_json::from_str(&text).map_err(|e| CliError::Data(format!("{}: {e}", p.display())))
}

/// Merged comparison table with the best value of each column starred.
pub fn merged_criteria(dirs: &[impl AsRef<Path>]) -> Result<Vec<Vec<String>>> {
    let mut reports = Vec::new();
    for d in dirs {
        reports.extend(read_reports(d.as_ref())?);
    }
    if let Some(first) = reports.first() {
        if let Some(bad) = reports.iter().find(|r| r.n != first.n) {
            return Err(CliError::Data(format!(
                "fits use different datasets: '{}' has n = {}, '{}' has n = {}",
                first.model, first.n, bad.model, bad.n
            )));
        }
    }
    Ok(criteria::table_rows(&reports, true))
}

pub fn cmd_criteria(args: &CriteriaArgs) -> Result<()> {
    let bytes = output::csv_bytes(&merged_criteria(&args.fits)?)?;
    match &args.out {
        Some(p) => std::fs::write(p, bytes).map_err(|e| CliError::io(p, e)),
        None => {
            print!("{}", String::from_utf8_lossy(&bytes));
            Ok(())
        }
    }
}

pub fn cmd_summarize(args: &SummarizeArgs) -> Result<()> {
    if !(args.level > 0.0 && args.level < 1.0) {
        return Err(CliError::Usage(format!("level must lie in (0, 1), got {}", args.level)));
    }
    let (names, cols) = output::read_chain_csv(&args.fit.join(output::CHAIN_FILE))?;
    let summaries = summaries_from_columns(&names, &cols, args.level)?;
    let mut art = Artifacts::new(args.out.as_deref().unwrap_or(&args.fit))?;
    write_summary(&mut art, &summaries)?;
    art.commit();
    Ok(())
}
