//! CSV ingestion and emission.

use std::fs::File;
use std::io::Write;
use std::path::{Path, PathBuf};

use misig_core::report::format_float;
use misig_core::Dataset;
use serde::{Deserialize, Serialize};

use crate::error::{BadCell, CliError};

/// Which columns to read. Columns are header names, or zero-based indices
/// when there is no header (an index also works with a header if no column
/// carries that name).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CsvSpec {
    pub path: PathBuf,
    pub target: String,
    pub feature: String,
    pub controls: Vec<String>,
    pub label: Option<String>,
    pub has_header: bool,
    pub intercept: bool,
}

fn resolve(column: &str, headers: Option<&csv::StringRecord>, width: usize) -> Result<usize, CliError> {
    if let Some(h) = headers {
        if let Some(i) = h.iter().position(|name| name == column) {
            return Ok(i);
        }
    }
    match column.parse::<usize>() {
        Ok(i) if i < width => Ok(i),
        _ => Err(CliError::ColumnNotFound(column.to_string())),
    }
}

fn parse_cell(raw: &str) -> Option<f64> {
    raw.trim().parse::<f64>().ok().filter(|v| v.is_finite())
}

/// Read a dataset. Every row with a missing or unparseable numeric cell is
/// reported; none are silently dropped.
pub fn load_csv(spec: &CsvSpec) -> Result<Dataset, CliError> {
    let file = File::open(&spec.path).map_err(|e| match e.kind() {
        std::io::ErrorKind::NotFound => CliError::FileNotFound(spec.path.clone()),
        _ => CliError::Io(format!("{}: {e}", spec.path.display())),
    })?;
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(spec.has_header)
        .flexible(false)
        .from_reader(file);
    let headers = if spec.has_header { Some(reader.headers()?.clone()) } else { None };

    let mut records = Vec::new();
    for r in reader.records() {
        records.push(r?);
    }
    if records.is_empty() {
        return Err(CliError::EmptyAfterFiltering(spec.path.clone()));
    }
    let width = headers.as_ref().map_or(records[0].len(), |h| h.len());
    let target = resolve(&spec.target, headers.as_ref(), width)?;
    let feature = resolve(&spec.feature, headers.as_ref(), width)?;
    let controls = spec
        .controls
        .iter()
        .map(|c| resolve(c, headers.as_ref(), width))
        .collect::<Result<Vec<_>, _>>()?;
    let label = spec
        .label
        .as_deref()
        .map(|c| resolve(c, headers.as_ref(), width))
        .transpose()?;

    let name = |i: usize| match &headers {
        Some(h) => h.get(i).unwrap_or_default().to_string(),
        None => i.to_string(),
    };
    let numeric: Vec<usize> = [feature, target].into_iter().chain(controls.iter().copied()).collect();
    let mut columns = vec![Vec::with_capacity(records.len()); numeric.len()];
    let mut labels = Vec::with_capacity(records.len());
    let mut bad = Vec::new();
    for (row, record) in records.iter().enumerate() {
        let line = record
            .position()
            .map_or(row as u64 + 1 + u64::from(spec.has_header), |p| p.line());
        for (slot, &col) in numeric.iter().enumerate() {
            let raw = record.get(col).unwrap_or("");
            match parse_cell(raw) {
                Some(v) => columns[slot].push(v),
                None => bad.push(BadCell {
                    line,
                    column: name(col),
                    value: raw.to_string(),
                }),
            }
        }
        if let Some(l) = label {
            labels.push(record.get(l).unwrap_or("").to_string());
        }
    }
    if !bad.is_empty() {
        return Err(CliError::ParseError(bad));
    }
    let mut columns = columns.into_iter();
    let x = columns.next().expect("feature column");
    let y = columns.next().expect("target column");
    let mut dataset = Dataset::new(x, y)?
        .with_controls(columns.collect())?
        .with_intercept(spec.intercept);
    if label.is_some() {
        dataset = dataset.with_labels(labels)?;
    }
    Ok(dataset)
}

/// Write a dataset as `label,<feature>,<target>,<controls...>` with 17
/// significant digits.
pub fn write_csv<W: Write>(out: W, dataset: &Dataset, names: &DatasetNames) -> Result<(), CliError> {
    let mut w = csv::Writer::from_writer(out);
    let mut header = vec![names.label.clone(), names.feature.clone(), names.target.clone()];
    header.extend(names.controls.iter().cloned());
    w.write_record(&header)?;
    for i in 0..dataset.len() {
        let mut row = vec![dataset.label(i), format_float(dataset.x()[i]), format_float(dataset.y()[i])];
        row.extend(dataset.controls().iter().map(|c| format_float(c[i])));
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DatasetNames {
    pub label: String,
    pub feature: String,
    pub target: String,
    pub controls: Vec<String>,
}

impl Default for DatasetNames {
    fn default() -> Self {
        Self {
            label: "label".into(),
            feature: "x".into(),
            target: "y".into(),
            controls: Vec::new(),
        }
    }
}

/// SHA-256 of a file as 64 hex digits.
pub fn file_digest(path: &Path) -> Result<String, CliError> {
    use sha2::{Digest, Sha256};
    let bytes = std::fs::read(path).map_err(|e| match e.kind() {
        std::io::ErrorKind::NotFound => CliError::FileNotFound(path.to_path_buf()),
        _ => CliError::Io(e.to_string()),
    })?;
    Ok(hex::encode(Sha256::digest(&bytes)))
}
