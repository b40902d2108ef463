//! Artifact files of a run. Everything written through an [`Artifacts`]
//! is removed again unless the run is committed.

use std::fs;
use std::path::{Path, PathBuf};

use dwreg::mcmc::ChainOutput;
use dwreg::posterior::ParameterSummary;
use serde::Serialize;

use crate::error::{CliError, Result};

pub const CHAIN_FILE: &str = "chain.csv";
pub const META_FILE: &str = "meta.json";
pub const SUMMARY_CSV: &str = "summary.csv";
pub const SUMMARY_JSON: &str = "summary.json";
pub const CRITERIA_CSV: &str = "criteria.csv";
pub const CRITERIA_JSON: &str = "criteria.json";
pub const DENSITY_DIR: &str = "densities";

pub struct Artifacts {
    root: PathBuf,
    created_root: bool,
    files: Vec<PathBuf>,
    dirs: Vec<PathBuf>,
    committed: bool,
}

impl Artifacts {
    pub fn new(root: &Path) -> Result<Self> {
        let created_root = !root.exists();
        fs::create_dir_all(root).map_err(|e| CliError::io(root, e))?;
        Ok(Self {
            root: root.to_path_buf(),
            created_root,
            files: Vec::new(),
            dirs: Vec::new(),
            committed: false,
        })
    }

    pub fn subdir(&mut self, name: &str) -> Result<PathBuf> {
        let p = self.root.join(name);
        if !p.exists() {
            fs::create_dir_all(&p).map_err(|e| CliError::io(&p, e))?;
            self.dirs.push(p.clone());
        }
        Ok(p)
    }

    /// Claims a file path that the caller writes itself.
    pub fn register(&mut self, rel: &str) -> PathBuf {
        let p = self.root.join(rel);
        self.files.push(p.clone());
        p
    }

    pub fn write(&mut self, rel: &str, contents: &[u8]) -> Result<PathBuf> {
        let p = self.register(rel);
        fs::write(&p, contents).map_err(|e| CliError::io(&p, e))?;
        Ok(p)
    }

    pub fn write_json<T: Serialize>(&mut self, rel: &str, value: &T) -> Result<PathBuf> {
        let mut text = serde_json::to_string_pretty(value)
            .map_err(|e| CliError::Numerical(format!("serializing {rel}: {e}")))?;
        text.push('\n');
        self.write(rel, text.as_bytes())
    }

    pub fn write_rows(&mut self, rel: &str, rows: &[Vec<String>]) -> Result<PathBuf> {
        self.write(rel, &csv_bytes(rows)?)
    }

    pub fn commit(mut self) {
        self.committed = true;
    }
}

impl Drop for Artifacts {
    fn drop(&mut self) {
        if self.committed {
            return;
        }
        for f in &self.files {
            let _ = fs::remove_file(f);
        }
        for d in self.dirs.iter().rev() {
            let _ = fs::remove_dir(d);
        }
        if self.created_root {
            let _ = fs::remove_dir(&self.root);
        }
    }
}

pub fn csv_bytes(rows: &[Vec<String>]) -> Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in rows {
        w.write_record(r)
            .map_err(|e| CliError::Numerical(format!("writing CSV: {e}")))?;
    }
    w.into_inner()
        .map_err(|e| CliError::Numerical(format!("writing CSV: {e}")))
}

/// `iter,<names>,loglik`, one row per kept draw.
pub fn chain_rows(chain: &ChainOutput) -> Vec<Vec<String>> {
    let mut header = vec!["iter".to_string()];
    header.extend(chain.names.iter().cloned());
    header.push("loglik".into());
    let burnin = chain.config.burnin();
    let mut rows = vec![header];
    for (k, (draw, ll)) in chain.samples.iter().zip(&chain.loglik_trace).enumerate() {
        let mut r = vec![(burnin + (k + 1) * chain.config.thin).to_string()];
        r.extend(draw.iter().map(|v| v.to_string()));
        r.push(ll.to_string());
        rows.push(r);
    }
    rows
}

pub const SUMMARY_HEADER: [&str; 8] = ["name", "mode", "mean", "median", "hpd_low", "hpd_high", "ess", "selected"];

pub fn summary_rows(summaries: &[ParameterSummary]) -> Vec<Vec<String>> {
    let mut rows = vec![SUMMARY_HEADER.map(String::from).to_vec()];
    for s in summaries {
        rows.push(vec![
            s.name.clone(),
            s.mode.to_string(),
            s.mean.to_string(),
            s.median.to_string(),
            s.hpd_low.to_string(),
            s.hpd_high.to_string(),
            format!("{:.1}", s.ess),
            s.selected.to_string(),
        ]);
    }
    rows
}

/// Columns of a chain CSV: parameter names (without `iter`/`loglik`) and
/// their values.
pub fn read_chain_csv(path: &Path) -> Result<(Vec<String>, Vec<Vec<f64>>)> {
    let mut r = csv::Reader::from_path(path)
        .map_err(|e| CliError::Data(format!("{}: {e}", path.display())))?;
    let header: Vec<String> = r
        .headers()
        .map_err(|e| CliError::Data(format!("{}: {e}", path.display())))?
        .iter()
        .map(String::from)
        .collect();
    if header.len() < 3 || header[0] != "iter" || header[header.len() - 1] != "loglik" {
        return Err(CliError::Data(format!(
            "{}: expected header iter,<params>,loglik",
            path.display()
        )));
    }
    let names = header[1..header.len() - 1].to_vec();
    let mut cols = vec![Vec::new(); names.len()];
    for (i, rec) in r.records().enumerate() {
        let rec = rec.map_err(|e| CliError::Data(format!("{}: {e}", path.display())))?;
        for (j, col) in cols.iter_mut().enumerate() {
            let cell = rec.get(j + 1).unwrap_or("");
            col.push(cell.parse().map_err(|_| {
                CliError::Data(format!("{}: line {}, column '{}': bad value '{cell}'", path.display(), i + 2, names[j]))
            })?);
        }
    }
    Ok((names, cols))
}
