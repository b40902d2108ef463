//! CSV ingestion and export of datasets.

use std::path::Path;

use dwreg::Dataset;

use crate::error::{CliError, Result};

/// Cells treated as missing rather than malformed.
const MISSING: [&str; 4] = ["", "NA", "na", "NaN"];

#[derive(Debug, Clone)]
pub struct Ingested {
    pub dataset: Dataset,
    /// Rows dropped because a used column was missing.
    pub dropped_rows: usize,
    pub covariates: Vec<String>,
}

fn column_index(headers: &[String], name: &str, path: &Path) -> Result<usize> {
    headers
        .iter()
        .position(|h| h == name)
        .ok_or_else(|| CliError::Data(format!("{}: no column named '{name}'", path.display())))
}

fn parse_response(cell: &str, line: usize, name: &str) -> Result<u64> {
    let v: f64 = cell
        .parse()
        .map_err(|_| CliError::Data(format!("line {line}, column '{name}': '{cell}' is not a number")))?;
    if v < 0.0 || v.fract() != 0.0 || !v.is_finite() {
        return Err(CliError::Data(format!(
            "line {line}, column '{name}': response must be a non-negative integer, got '{cell}'"
        )));
    }
    Ok(v as u64)
}

/// Reads `response` and `covariates` (all other columns when `None`) from a
/// headed CSV file and prepends the intercept column.
pub fn ingest_csv(path: &Path, response: &str, covariates: Option<&[String]>) -> Result<Ingested> {
    let mut reader = csv::Reader::from_path(path).map_err(|e| csv_error(path, e))?;
    let headers: Vec<String> = reader
        .headers()
        .map_err(|e| csv_error(path, e))?
        .iter()
        .map(|h| h.trim().to_string())
        .collect();
    let y_idx = column_index(&headers, response, path)?;
    let covariates: Vec<String> = match covariates {
        Some(c) => c.to_vec(),
        None => headers.iter().filter(|h| *h != response).cloned().collect(),
    };
    let x_idx = covariates
        .iter()
        .map(|c| column_index(&headers, c, path))
        .collect::<Result<Vec<_>>>()?;

    let mut y = Vec::new();
    let mut rows = Vec::new();
    let mut dropped = 0;
    for (i, record) in reader.records().enumerate() {
        let record = record.map_err(|e| csv_error(path, e))?;
        let line = i + 2;
        let cell = |j: usize| record.get(j).map(str::trim).unwrap_or("");
        if std::iter::once(y_idx).chain(x_idx.iter().copied()).any(|j| MISSING.contains(&cell(j))) {
            dropped += 1;
            continue;
        }
        y.push(parse_response(cell(y_idx), line, response)?);
        let row = x_idx
            .iter()
            .zip(&covariates)
            .map(|(&j, name)| {
                cell(j).parse::<f64>().ok().filter(|v| v.is_finite()).ok_or_else(|| {
                    CliError::Data(format!("line {line}, column '{name}': '{}' is not a number", cell(j)))
                })
            })
            .collect::<Result<Vec<f64>>>()?;
        rows.push(row);
    }
    if y.is_empty() {
        return Err(CliError::Data(format!("{}: no complete rows", path.display())));
    }
    let dataset = Dataset::from_covariates(y, &rows, &covariates)?;
    Ok(Ingested {
        dataset,
        dropped_rows: dropped,
        covariates,
    })
}

fn csv_error(path: &Path, e: csv::Error) -> CliError {
    match e.kind() {
        csv::ErrorKind::Io(_) => CliError::Data(format!("{}: {e}", path.display())),
        _ => CliError::Data(format!("{}: malformed CSV: {e}", path.display())),
    }
}

/// Writes `y` followed by the non-intercept columns.
pub fn write_dataset_csv(path: &Path, data: &Dataset, response: &str) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(|e| csv_error(path, e))?;
    let mut header = vec![response.to_string()];
    header.extend(data.names()[1..].iter().cloned());
    w.write_record(&header).map_err(|e| csv_error(path, e))?;
    for (row, y) in data.rows().zip(data.y()) {
        let mut rec = vec![y.to_string()];
        rec.extend(row[1..].iter().map(|v| v.to_string()));
        w.write_record(&rec).map_err(|e| csv_error(path, e))?;
    }
    w.flush().map_err(|e| CliError::io(path, e))
}
