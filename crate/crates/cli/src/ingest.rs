//! Household CSV files: `timestamp,<aggregate>,<appliance>...` with one row
//! per sample and watts in every power column.
//!
//! Timestamps are either integer epoch seconds or ISO-8601 date-times. The
//! format is detected from the first data row and must hold for the whole
//! file. Date-times without an offset are read as UTC.

use std::fs::File;
use std::io::Write;
use std::path::{Path, PathBuf};

use chrono::{DateTime, NaiveDateTime};
use sparsenilm_core::dataset::{DatasetError, Household, PowerTrace};

#[derive(Debug, thiserror::Error)]
pub enum IngestError {
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{path}: {source}")]
    Csv { path: PathBuf, source: csv::Error },
    #[error("missing column {0:?}")]
    MissingColumn(String),
    #[error("file has no data rows")]
    NoRows,
    #[error("row {row}: timestamp does not increase")]
    NonMonotonicTimestamp { row: usize },
    #[error("row {row}: negative power in column {column:?}")]
    NegativePower { row: usize, column: String },
    #[error("row {row}: cannot parse timestamp {value:?}")]
    BadTimestamp { row: usize, value: String },
    #[error("row {row}: cannot parse {value:?} in column {column:?} as watts")]
    BadValue { row: usize, column: String, value: String },
    #[error("row {row}: expected {expected} fields, found {found}")]
    RaggedRow { row: usize, expected: usize, found: usize },
    #[error(transparent)]
    Dataset(#[from] DatasetError),
}

/// Maps file columns onto a household. `appliances = None` takes every
/// column other than the timestamp and aggregate, in file order.
#[derive(Debug, Clone, PartialEq)]
pub struct CsvSchema {
    pub timestamp: String,
    pub aggregate: String,
    pub appliances: Option<Vec<String>>,
}

impl Default for CsvSchema {
    fn default() -> Self {
        CsvSchema { timestamp: "timestamp".into(), aggregate: "aggregate".into(), appliances: None }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum TimeFormat {
    Epoch,
    Iso8601,
}

fn detect(value: &str) -> Option<TimeFormat> {
    if value.parse::<i64>().is_ok() {
        Some(TimeFormat::Epoch)
    } else if parse_iso(value).is_some() {
        Some(TimeFormat::Iso8601)
    } else {
        None
    }
}

fn parse_iso(value: &str) -> Option<i64> {
    if let Ok(t) = DateTime::parse_from_rfc3339(value) {
        return Some(t.timestamp());
    }
    for fmt in ["%Y-%m-%dT%H:%M:%S%.f", "%Y-%m-%d %H:%M:%S%.f", "%Y-%m-%dT%H:%M", "%Y-%m-%d %H:%M"] {
        if let Ok(t) = NaiveDateTime::parse_from_str(value, fmt) {
            return Some(t.and_utc().timestamp());
        }
    }
    if let Ok(t) = DateTime::parse_from_str(value, "%Y-%m-%d %H:%M:%S%#z") {
        return Some(t.timestamp());
    }
    None
}

fn parse_time(format: TimeFormat, value: &str) -> Option<i64> {
    match format {
        TimeFormat::Epoch => value.parse().ok(),
        TimeFormat::Iso8601 => parse_iso(value),
    }
}

/// Reads a household CSV. Row numbers in errors count data rows from 1.
pub fn ingest_csv(path: &Path, schema: &CsvSchema) -> Result<Household, IngestError> {
    let file = File::open(path).map_err(|source| IngestError::Io { path: path.to_owned(), source })?;
    let csv_err = |source| IngestError::Csv { path: path.to_owned(), source };
    let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).flexible(true).from_reader(file);
    let header: Vec<String> = reader.headers().map_err(csv_err)?.iter().map(str::to_owned).collect();

    let find = |name: &str| header.iter().position(|h| h == name).ok_or_else(|| IngestError::MissingColumn(name.to_owned()));
    let ts_col = find(&schema.timestamp)?;
    let agg_col = find(&schema.aggregate)?;
    let appliance_names: Vec<String> = match &schema.appliances {
        Some(names) => names.clone(),
        None => header
            .iter()
            .enumerate()
            .filter(|(i, _)| *i != ts_col && *i != agg_col)
            .map(|(_, h)| h.clone())
            .collect(),
    };
    let appliance_cols = appliance_names.iter().map(|n| find(n)).collect::<Result<Vec<_>, _>>()?;
    if appliance_cols.is_empty() {
        return Err(DatasetError::NoAppliances.into());
    }

    let mut format = None;
    let mut timestamps = Vec::new();
    let mut aggregate = Vec::new();
    let mut appliances = vec![Vec::new(); appliance_cols.len()];
    for (i, record) in reader.records().enumerate() {
        let row = i + 1;
        let record = record.map_err(csv_err)?;
        if record.len() != header.len() {
            return Err(IngestError::RaggedRow { row, expected: header.len(), found: record.len() });
        }
        let raw_ts = &record[ts_col];
        let fmt = *format.get_or_insert_with(|| detect(raw_ts).unwrap_or(TimeFormat::Epoch));
        let t = parse_time(fmt, raw_ts).ok_or_else(|| IngestError::BadTimestamp { row, value: raw_ts.to_owned() })?;
        if timestamps.last().is_some_and(|&prev| t <= prev) {
            return Err(IngestError::NonMonotonicTimestamp { row });
        }
        timestamps.push(t);

        let watts = |col: usize| -> Result<f64, IngestError> {
            let raw = &record[col];
            let v: f64 = raw
                .parse()
                .ok()
                .filter(|v: &f64| v.is_finite())
                .ok_or_else(|| IngestError::BadValue { row, column: header[col].clone(), value: raw.to_owned() })?;
            if v < 0.0 {
                return Err(IngestError::NegativePower { row, column: header[col].clone() });
            }
            Ok(v)
        };
        aggregate.push(watts(agg_col)?);
        for (trace, &col) in appliances.iter_mut().zip(&appliance_cols) {
            trace.push(watts(col)?);
        }
    }
    if timestamps.is_empty() {
        return Err(IngestError::NoRows);
    }

    let aggregate = PowerTrace::new(timestamps.clone(), aggregate)?;
    let appliances =
        appliances.into_iter().map(|v| PowerTrace::new(timestamps.clone(), v)).collect::<Result<Vec<_>, _>>()?;
    Ok(Household::new(aggregate, appliances, appliance_names)?)
}

/// Writes a household whose traces share one timestamp grid, in the format
/// [`ingest_csv`] reads with the default schema.
pub fn write_household_csv(path: &Path, house: &Household) -> Result<(), IngestError> {
    let io_err = |source| IngestError::Io { path: path.to_owned(), source };
    for trace in &house.appliances {
        if trace.timestamps() != house.aggregate.timestamps() {
            return Err(DatasetError::GridMismatch("appliance timestamps differ from the aggregate".into()).into());
        }
    }
    let mut out = String::new();
    out.push_str("timestamp,aggregate");
    for name in &house.appliance_names {
        out.push(',');
        out.push_str(name);
    }
    out.push('\n');
    for (i, t) in house.aggregate.timestamps().iter().enumerate() {
        out.push_str(&t.to_string());
        for v in std::iter::once(&house.aggregate).chain(&house.appliances).map(|tr| tr.values()[i]) {
            out.push(',');
            out.push_str(&v.to_string());
        }
        out.push('\n');
    }
    let mut file = File::create(path).map_err(io_err)?;
    file.write_all(out.as_bytes()).map_err(io_err)
}
