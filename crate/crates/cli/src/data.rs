//! Numeric CSV ingestion.

use std::fs::File;
use std::path::Path;

use penreg::{Dataset, Matrix};

use crate::CliError;

/// Reads a numeric CSV into a dataset. `target` is a header name or a
/// 1-based column number and defaults to the first column; every other
/// column becomes a predictor. Blank lines are skipped.
pub fn load_csv(path: &Path, has_header: bool, target: Option<&str>) -> Result<Dataset, CliError> {
    let file = File::open(path).map_err(|e| CliError::Io(format!("cannot open {}: {e}", path.display())))?;
    read_csv(file, has_header, target).map_err(|e| match e {
        CliError::Validation(m) => CliError::Validation(format!("{}: {m}", path.display())),
        other => other,
    })
}

pub fn read_csv<R: std::io::Read>(reader: R, has_header: bool, target: Option<&str>) -> Result<Dataset, CliError> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(has_header).flexible(true).from_reader(reader);
    let header: Option<Vec<String>> = if has_header {
        let h = rdr.headers().map_err(csv_error)?;
        Some(h.iter().map(|s| s.trim().to_owned()).collect())
    } else {
        None
    };

    let mut rows: Vec<Vec<f64>> = Vec::new();
    let mut width = header.as_ref().map(|h| h.len());
    for rec in rdr.records() {
        let rec = rec.map_err(csv_error)?;
        let line = rec.position().map_or(0, |p| p.line());
        if rec.iter().all(|c| c.trim().is_empty()) {
            continue;
        }
        let w = *width.get_or_insert(rec.len());
        if rec.len() != w {
            return Err(CliError::Validation(format!("line {line}: expected {w} fields, found {}", rec.len())));
        }
        let mut row = Vec::with_capacity(w);
        for (j, cell) in rec.iter().enumerate() {
            let v: f64 = cell.trim().parse().map_err(|_| {
                CliError::Validation(format!("line {line}, column {}: '{}' is not a number", j + 1, cell.trim()))
            })?;
            if !v.is_finite() {
                return Err(CliError::Validation(format!("line {line}, column {}: non-finite value", j + 1)));
            }
            row.push(v);
        }
        rows.push(row);
    }
    let width = match width {
        Some(w) if !rows.is_empty() => w,
        _ => return Err(CliError::Validation("no data rows".into())),
    };
    if width < 2 {
        return Err(CliError::Validation("need a target column and at least one predictor".into()));
    }

    let t = target_index(target, header.as_deref(), width)?;
    let y: Vec<f64> = rows.iter().map(|r| r[t]).collect();
    let x_rows: Vec<Vec<f64>> = rows
        .iter()
        .map(|r| r.iter().enumerate().filter(|&(j, _)| j != t).map(|(_, &v)| v).collect())
        .collect();
    let names = header.map(|h| h.into_iter().enumerate().filter(|&(j, _)| j != t).map(|(_, s)| s).collect());
    Ok(Dataset::with_names(Matrix::from_rows(&x_rows)?, y, names)?)
}

fn target_index(target: Option<&str>, header: Option<&[String]>, width: usize) -> Result<usize, CliError> {
    let Some(t) = target else { return Ok(0) };
    if let Some(j) = header.and_then(|h| h.iter().position(|c| c == t)) {
        return Ok(j);
    }
    match t.parse::<usize>() {
        Ok(k) if (1..=width).contains(&k) => Ok(k - 1),
        _ => Err(CliError::Validation(format!("target column '{t}' not found"))),
    }
}

fn csv_error(e: csv::Error) -> CliError {
    let at = e.position().map(|p| format!("line {}: ", p.line())).unwrap_or_default();
    match e.kind() {
        csv::ErrorKind::Io(_) => CliError::Io(format!("{at}{e}")),
        _ => CliError::Validation(format!("{at}{e}")),
    }
}

/// Predictor names, falling back to `x1, x2, ...`.
pub fn column_names(d: &Dataset) -> Vec<String> {
    (0..d.p())
        .map(|j| d.column_name(j).map_or_else(|| format!("x{}", j + 1), str::to_owned))
        .collect()
}
