//! Ingestion of canonical trade and GDP tables and the joined country panel.
//!
//! Canonical schemas (UTF-8, header required):
//!
//! ```text
//! country_code,year,trade_total_usd
//! country_code,year,gdp_usd,gdp_growth_pct
//! ```
//!
//! Rows with a missing or non-positive amount are skipped and reported.
//! Malformed headers, unparseable numbers and duplicate keys are hard errors.

use std::collections::{BTreeMap, BTreeSet};
use std::fs::File;
use std::io::Read;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const TRADE_HEADER: [&str; 3] = ["country_code", "year", "trade_total_usd"];
pub const GDP_HEADER: [&str; 4] = ["country_code", "year", "gdp_usd", "gdp_growth_pct"];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TradeRecord {
    pub country_code: String,
    pub year: i32,
    /// World exports plus imports, USD.
    pub trade_total: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GdpRecord {
    pub country_code: String,
    pub year: i32,
    pub gdp: f64,
    /// Annual growth as a fraction (4 % is 0.04); `None` when not reported.
    pub gdp_growth: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SkippedRow {
    pub line: u64,
    pub key: String,
    pub reason: String,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct SkipReport {
    pub source: String,
    pub skipped: Vec<SkippedRow>,
}

impl SkipReport {
    pub fn count(&self) -> usize {
        self.skipped.len()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Loaded<T> {
    pub records: Vec<T>,
    pub report: SkipReport,
}

pub fn load_trade_table(path: impl AsRef<Path>) -> Result<Loaded<TradeRecord>> {
    let path = path.as_ref();
    read_trade_table(open(path)?, path)
}

pub fn load_gdp_table(path: impl AsRef<Path>) -> Result<Loaded<GdpRecord>> {
    let path = path.as_ref();
    read_gdp_table(open(path)?, path)
}

fn open(path: &Path) -> Result<File> {
    File::open(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

/// Parses a trade table from any reader; `source` is used in messages only.
pub fn read_trade_table<R: Read>(reader: R, source: impl AsRef<Path>) -> Result<Loaded<TradeRecord>> {
    let mut table = Table::new(reader, source.as_ref(), &TRADE_HEADER)?;
    let mut records = Vec::new();
    while let Some(row) = table.next_row()? {
        let (code, year) = table.key(&row)?;
        let key = format!("{code}/{year}");
        match table.amount(&row, 2)? {
            Amount::Missing => table.skip(&key, "missing trade_total"),
            Amount::NonPositive(v) => table.skip(&key, &format!("non-positive trade_total {v}")),
            Amount::Value(trade_total) => records.push(TradeRecord {
                country_code: code,
                year,
                trade_total,
            }),
        }
    }
    Ok(Loaded {
        records,
        report: table.report,
    })
}

pub fn read_gdp_table<R: Read>(reader: R, source: impl AsRef<Path>) -> Result<Loaded<GdpRecord>> {
    let mut table = Table::new(reader, source.as_ref(), &GDP_HEADER)?;
    let mut records = Vec::new();
    while let Some(row) = table.next_row()? {
        let (code, year) = table.key(&row)?;
        let key = format!("{code}/{year}");
        let gdp = match table.amount(&row, 2)? {
            Amount::Missing => {
                table.skip(&key, "missing gdp");
                continue;
            }
            Amount::NonPositive(v) => {
                table.skip(&key, &format!("non-positive gdp {v}"));
                continue;
            }
            Amount::Value(v) => v,
        };
        let growth = match row.get(3).map(str::trim).unwrap_or("") {
            "" => None,
            raw => Some(table.number(raw, "gdp_growth_pct")? / 100.0),
        };
        records.push(GdpRecord {
            country_code: code,
            year,
            gdp,
            gdp_growth: growth,
        });
    }
    Ok(Loaded {
        records,
        report: table.report,
    })
}

enum Amount {
    Missing,
    NonPositive(f64),
    Value(f64),
}

struct Table<R: Read> {
    reader: csv::Reader<R>,
    path: PathBuf,
    line: u64,
    seen: BTreeSet<(String, i32)>,
    report: SkipReport,
}

impl<R: Read> Table<R> {
    fn new(reader: R, path: &Path, expected: &[&str]) -> Result<Self> {
        let mut reader = csv::ReaderBuilder::new()
            .has_headers(true)
            .flexible(true)
            .from_reader(reader);
        let header = reader.headers().map_err(|source| Error::Csv {
            path: path.to_path_buf(),
            source,
        })?;
        let found: Vec<String> = header
            .iter()
            .map(|h| h.trim().trim_start_matches('\u{feff}').to_string())
            .collect();
        if found.iter().map(String::as_str).ne(expected.iter().copied()) {
            return Err(Error::MalformedHeader {
                path: path.to_path_buf(),
                expected: expected.join(","),
                found: found.join(","),
            });
        }
        Ok(Table {
            reader,
            path: path.to_path_buf(),
            line: 1,
            seen: BTreeSet::new(),
            report: SkipReport {
                source: path.display().to_string(),
                skipped: Vec::new(),
            },
        })
    }

    fn next_row(&mut self) -> Result<Option<csv::StringRecord>> {
        let mut row = csv::StringRecord::new();
        let more = self.reader.read_record(&mut row).map_err(|source| Error::Csv {
            path: self.path.clone(),
            source,
        })?;
        if !more {
            return Ok(None);
        }
        self.line = row.position().map_or(self.line + 1, |p| p.line());
        Ok(Some(row))
    }

    fn row_error(&self, message: String) -> Error {
        Error::InvalidRow {
            path: self.path.clone(),
            line: self.line,
            message,
        }
    }

    fn key(&mut self, row: &csv::StringRecord) -> Result<(String, i32)> {
        let code = row.get(0).unwrap_or("").trim();
        if code.len() != 3 || !code.bytes().all(|b| b.is_ascii_alphanumeric()) {
            return Err(self.row_error(format!("invalid country code `{code}`")));
        }
        let code = code.to_ascii_uppercase();
        let raw_year = row.get(1).unwrap_or("").trim();
        let year: i32 = raw_year
            .parse()
            .map_err(|_| self.row_error(format!("invalid year `{raw_year}`")))?;
        if !self.seen.insert((code.clone(), year)) {
            return Err(Error::DuplicateKey {
                key: format!("{code}/{year}"),
            });
        }
        Ok((code, year))
    }

    fn number(&self, raw: &str, column: &str) -> Result<f64> {
        match raw.parse::<f64>() {
            Ok(v) if v.is_finite() => Ok(v),
            _ => Err(self.row_error(format!("invalid {column} `{raw}`"))),
        }
    }

    fn amount(&self, row: &csv::StringRecord, idx: usize) -> Result<Amount> {
        let raw = row.get(idx).unwrap_or("").trim();
        if raw.is_empty() {
            return Ok(Amount::Missing);
        }
        // U+2212 minus sign shows up in spreadsheet exports.
        let normalized = raw.replace('\u{2212}', "-");
        let v = self.number(&normalized, "amount")?;
        Ok(if v > 0.0 {
            Amount::Value(v)
        } else {
            Amount::NonPositive(v)
        })
    }

    fn skip(&mut self, key: &str, reason: &str) {
        self.report.skipped.push(SkippedRow {
            line: self.line,
            key: key.to_string(),
            reason: reason.to_string(),
        });
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PanelRow {
    pub country_code: String,
    pub year: i32,
    pub trade_total: f64,
    pub gdp: f64,
    pub gdp_growth: Option<f64>,
    /// Trade strength, trade_total / gdp.
    pub g: f64,
    /// Strength rate g · gdp_growth, when growth is known.
    pub f: Option<f64>,
}

/// Country-year rows present in both source tables, sorted by (country, year).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CountryPanel {
    rows: Vec<PanelRow>,
}

impl CountryPanel {
    pub fn rows(&self) -> &[PanelRow] {
        &self.rows
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn rows_for_year(&self, year: i32) -> impl Iterator<Item = &PanelRow> {
        self.rows.iter().filter(move |r| r.year == year)
    }

    pub fn years(&self) -> BTreeSet<i32> {
        self.rows.iter().map(|r| r.year).collect()
    }

    /// Rows of one country keyed by year.
    pub fn country(&self, code: &str) -> BTreeMap<i32, &PanelRow> {
        self.rows
            .iter()
            .filter(|r| r.country_code == code)
            .map(|r| (r.year, r))
            .collect()
    }

    /// Multiplies every trade total by `c`, recomputing g and f.
    pub fn scale_trade(&self, c: f64) -> CountryPanel {
        CountryPanel {
            rows: self
                .rows
                .iter()
                .map(|r| make_row(&r.country_code, r.year, r.trade_total * c, r.gdp, r.gdp_growth))
                .collect(),
        }
    }
}

fn make_row(code: &str, year: i32, trade_total: f64, gdp: f64, growth: Option<f64>) -> PanelRow {
    let g = trade_total / gdp;
    PanelRow {
        country_code: code.to_string(),
        year,
        trade_total,
        gdp,
        gdp_growth: growth,
        g,
        f: growth.map(|r| g * r),
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct JoinReport {
    /// `CODE/YEAR` keys present only in the trade table.
    pub unmatched_trade: Vec<String>,
    /// `CODE/YEAR` keys present only in the GDP table.
    pub unmatched_gdp: Vec<String>,
    /// Joined keys without a growth figure.
    pub missing_growth: Vec<String>,
}

/// Inner join on (country, year).
pub fn join_panel(trade: &[TradeRecord], gdp: &[GdpRecord]) -> Result<(CountryPanel, JoinReport)> {
    let gdp_by_key: BTreeMap<(&str, i32), &GdpRecord> = gdp
        .iter()
        .map(|r| ((r.country_code.as_str(), r.year), r))
        .collect();
    let mut matched = BTreeSet::new();
    let mut rows = Vec::new();
    let mut report = JoinReport::default();
    for t in trade {
        let key = (t.country_code.as_str(), t.year);
        match gdp_by_key.get(&key) {
            Some(gr) => {
                matched.insert(key);
                if gr.gdp_growth.is_none() {
                    report.missing_growth.push(format!("{}/{}", t.country_code, t.year));
                }
                rows.push(make_row(&t.country_code, t.year, t.trade_total, gr.gdp, gr.gdp_growth));
            }
            None => report
                .unmatched_trade
                .push(format!("{}/{}", t.country_code, t.year)),
        }
    }
    report.unmatched_gdp = gdp
        .iter()
        .filter(|r| !matched.contains(&(r.country_code.as_str(), r.year)))
        .map(|r| format!("{}/{}", r.country_code, r.year))
        .collect();
    if rows.is_empty() {
        return Err(Error::EmptyJoin);
    }
    rows.sort_by(|a, b| (&a.country_code, a.year).cmp(&(&b.country_code, b.year)));
    report.unmatched_trade.sort();
    report.unmatched_gdp.sort();
    report.missing_growth.sort();
    Ok((CountryPanel { rows }, report))
}

/// Z-scores with the population (divisor n) standard deviation.
pub fn zscore_normalize(values: &[f64]) -> Result<Vec<f64>> {
    if values.len() < 2 {
        return Err(Error::InsufficientData {
            context: "normalization".into(),
            needed: 2,
            got: values.len(),
        });
    }
    if let Some(v) = values.iter().find(|v| !v.is_finite()) {
        return Err(Error::invalid("value", *v, "must be finite"));
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
    let sd = var.sqrt();
    let magnitude = values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if !(sd > 1e-14 * magnitude) {
        return Err(Error::degenerate("zero standard deviation"));
    }
    Ok(values.iter().map(|v| (v - mean) / sd).collect())
}
