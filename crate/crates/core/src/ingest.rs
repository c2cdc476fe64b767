//! CSV ingestion of dated price series.
//!
//! Input is a CSV file with a header row, one instrument per file. The date
//! and price columns are selected by name or 0-based index (defaults "date"
//! and "adj_close"), dates parse with a configurable chrono pattern
//! (default ISO-8601 `%Y-%m-%d`). Rows are sorted by date on ingest, so the
//! file order never matters; parse and validation errors name the offending
//! 1-based file line.

use std::path::{Path, PathBuf};

use chrono::NaiveDate;

use crate::error::{Error, Result};
use crate::series::{PricePoint, PriceSeries};

pub const DEFAULT_DATE_COLUMN: &str = "date";
pub const DEFAULT_PRICE_COLUMN: &str = "adj_close";
pub const DEFAULT_DATE_FORMAT: &str = "%Y-%m-%d";

/// Column selector: a header name, or a 0-based index for headerless vendors
/// that emit positional exports.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ColumnSel {
    Name(String),
    Index(usize),
}

impl ColumnSel {
    /// Resolves against the header row. An exact header match wins; a purely
    /// numeric selector that matches no header is treated as an index.
    fn resolve(&self, headers: &csv::StringRecord) -> Result<usize> {
        match self {
            ColumnSel::Index(i) => {
                if *i < headers.len() {
                    Ok(*i)
                } else {
                    Err(Error::ingest(
                        None,
                        format!("column index {i} out of range (found {} columns)", headers.len()),
                    ))
                }
            }
            ColumnSel::Name(name) => {
                if let Some(idx) = headers.iter().position(|h| h.trim() == name) {
                    return Ok(idx);
                }
                if let Ok(idx) = name.parse::<usize>() {
                    if idx < headers.len() {
                        return Ok(idx);
                    }
                }
                Err(Error::ingest(
                    None,
                    format!(
                        "column '{name}' not found in header [{}]",
                        headers.iter().collect::<Vec<_>>().join(", ")
                    ),
                ))
            }
        }
    }
}

impl From<&str> for ColumnSel {
    fn from(s: &str) -> Self {
        ColumnSel::Name(s.to_string())
    }
}

/// Policy for rows sharing one date.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum DuplicatePolicy {
    /// Reject the file, naming the duplicated date.
    #[default]
    Error,
    /// Keep the row that appears last in the file.
    KeepLast,
}

/// Everything needed to load one price file.
#[derive(Debug, Clone)]
pub struct IngestSpec {
    pub path: PathBuf,
    pub date_column: ColumnSel,
    pub price_column: ColumnSel,
    pub date_format: String,
    pub on_duplicate: DuplicatePolicy,
    /// Instrument label; defaults to the file stem.
    pub instrument_id: Option<String>,
}

impl IngestSpec {
    pub fn new(path: impl Into<PathBuf>) -> Self {
        IngestSpec {
            path: path.into(),
            date_column: ColumnSel::Name(DEFAULT_DATE_COLUMN.to_string()),
            price_column: ColumnSel::Name(DEFAULT_PRICE_COLUMN.to_string()),
            date_format: DEFAULT_DATE_FORMAT.to_string(),
            on_duplicate: DuplicatePolicy::Error,
            instrument_id: None,
        }
    }
}

/// Loads, parses, sorts and validates a price series per the spec.
pub fn ingest(spec: &IngestSpec) -> Result<PriceSeries> {
    let file = std::fs::File::open(&spec.path).map_err(|e| {
        Error::ingest(None, format!("cannot open {}: {e}", spec.path.display()))
    })?;
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .flexible(true)
        .from_reader(file);

    let headers = reader
        .headers()
        .map_err(|e| Error::ingest(None, format!("cannot read header row: {e}")))?
        .clone();
    let date_idx = spec.date_column.resolve(&headers)?;
    let price_idx = spec.price_column.resolve(&headers)?;

    // (date, file order, price); file order breaks duplicate-date ties.
    let mut rows: Vec<(NaiveDate, usize, f64)> = Vec::new();
    for (order, record) in reader.records().enumerate() {
        let record = record.map_err(|e| {
            Error::ingest(e.position().map(|p| p.line()), format!("malformed CSV row: {e}"))
        })?;
        let line = record.position().map(|p| p.line());

        let date_raw = record.get(date_idx).ok_or_else(|| {
            Error::ingest(line, format!("missing date column (index {date_idx})"))
        })?;
        let date = NaiveDate::parse_from_str(date_raw, &spec.date_format).map_err(|e| {
            Error::ingest(
                line,
                format!("cannot parse date '{date_raw}' with format '{}': {e}", spec.date_format),
            )
        })?;

        let price_raw = record.get(price_idx).ok_or_else(|| {
            Error::ingest(line, format!("missing price column (index {price_idx})"))
        })?;
        let price: f64 = price_raw.parse().map_err(|_| {
            Error::ingest(line, format!("cannot parse price '{price_raw}' as a number"))
        })?;
        if !price.is_finite() || price <= 0.0 {
            return Err(Error::ingest(
                line,
                format!("price must be positive and finite, got '{price_raw}'"),
            ));
        }
        rows.push((date, order, price));
    }

    if rows.is_empty() {
        return Err(Error::ingest(
            None,
            format!("{} contains no data rows", spec.path.display()),
        ));
    }

    rows.sort_by(|a, b| a.0.cmp(&b.0).then(a.1.cmp(&b.1)));
    let mut observations: Vec<PricePoint> = Vec::with_capacity(rows.len());
    for (date, _, price) in rows {
        match observations.last_mut() {
            Some(last) if last.date == date => match spec.on_duplicate {
                DuplicatePolicy::Error => {
                    return Err(Error::ingest(
                        None,
                        format!("duplicate rows for date {date} (use keep-last to override)"),
                    ));
                }
                DuplicatePolicy::KeepLast => {
                    last.price = price;
                }
            },
            _ => observations.push(PricePoint { date, price }),
        }
    }

    let id = spec.instrument_id.clone().unwrap_or_else(|| {
        spec.path
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_else(|| "series".to_string())
    });
    PriceSeries::new(id, observations)
}

/// Writes a price series as CSV with the default header.
pub fn write_prices_csv(path: &Path, series: &PriceSeries) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record([DEFAULT_DATE_COLUMN, DEFAULT_PRICE_COLUMN])
        .map_err(csv_io)?;
    for obs in series.observations() {
        w.write_record([obs.date.format("%Y-%m-%d").to_string(), obs.price.to_string()])
            .map_err(csv_io)?;
    }
    w.flush()?;
    Ok(())
}

pub(crate) fn csv_io(e: csv::Error) -> Error {
    Error::Io(std::io::Error::other(e))
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        csv_io(e)
    }
}
