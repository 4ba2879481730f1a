//! Per-year trade strength g and strength-rate samples.

use std::io::{Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::dataset::CountryPanel;
use crate::distfit::Sample;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct StrengthSample {
    pub year: i32,
    pub countries: Vec<String>,
    pub values: Sample,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Sign {
    Positive,
    Negative,
}

/// Magnitudes |f| ready for fitting, with the sign of each kept aside.
#[derive(Debug, Clone, PartialEq)]
pub struct RateSample {
    pub year: i32,
    pub countries: Vec<String>,
    pub values: Sample,
    pub signs: Vec<Sign>,
    /// Countries whose growth is exactly zero.
    pub excluded_zero: Vec<String>,
    /// Countries dropped because growth was not reported.
    pub missing_growth: Vec<String>,
    /// Countries dropped by [`RatePolicy::exclude_negative`].
    pub excluded_negative: Vec<String>,
}

impl RateSample {
    pub fn count(&self, sign: Sign) -> usize {
        self.signs.iter().filter(|&&s| s == sign).count()
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct RatePolicy {
    /// Drop shrinking economies instead of fitting their magnitudes.
    pub exclude_negative: bool,
}

pub fn compute_strength(panel: &CountryPanel, year: i32) -> Result<StrengthSample> {
    let (countries, values): (Vec<String>, Vec<f64>) = panel
        .rows_for_year(year)
        .map(|r| (r.country_code.clone(), r.g))
        .unzip();
    if values.is_empty() {
        return Err(Error::NoRowsForYear { year });
    }
    Ok(StrengthSample {
        year,
        countries,
        values: Sample::new(values)?,
    })
}

pub fn compute_strength_rate(panel: &CountryPanel, year: i32) -> Result<RateSample> {
    compute_strength_rate_with(panel, year, RatePolicy::default())
}

pub fn compute_strength_rate_with(
    panel: &CountryPanel,
    year: i32,
    policy: RatePolicy,
) -> Result<RateSample> {
    let mut countries = Vec::new();
    let mut values = Vec::new();
    let mut signs = Vec::new();
    let mut excluded_zero = Vec::new();
    let mut missing_growth = Vec::new();
    let mut excluded_negative = Vec::new();
    let mut any_row = false;
    for row in panel.rows_for_year(year) {
        any_row = true;
        let code = row.country_code.clone();
        match row.f {
            None => missing_growth.push(code),
            Some(0.0) => excluded_zero.push(code),
            Some(f) if f < 0.0 && policy.exclude_negative => excluded_negative.push(code),
            Some(f) => {
                countries.push(code);
                values.push(f.abs());
                signs.push(if f > 0.0 { Sign::Positive } else { Sign::Negative });
            }
        }
    }
    if !any_row || values.is_empty() {
        return Err(Error::NoRowsForYear { year });
    }
    Ok(RateSample {
        year,
        countries,
        values: Sample::new(values)?,
        signs,
        excluded_zero,
        missing_growth,
        excluded_negative,
    })
}

pub const SAMPLE_HEADER: [&str; 2] = ["country_code", "value"];

/// Writes a `country_code,value` sample file.
pub fn write_sample_csv<W: Write>(writer: W, countries: &[String], values: &[f64]) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    let wrap = |source| Error::Csv {
        path: "<output>".into(),
        source,
    };
    w.write_record(SAMPLE_HEADER).map_err(wrap)?;
    for (c, v) in countries.iter().zip(values) {
        w.write_record([c.as_str(), &v.to_string()]).map_err(wrap)?;
    }
    w.flush().map_err(|source| Error::Io {
        path: "<output>".into(),
        source,
    })
}

/// Reads a `country_code,value` sample file. Every value must be strictly
/// positive; the first offending row is reported by line and country.
pub fn read_sample_csv<R: Read>(reader: R, source: impl AsRef<Path>) -> Result<(Vec<String>, Sample)> {
    let path = source.as_ref().to_path_buf();
    let mut rdr = csv::ReaderBuilder::new().flexible(true).from_reader(reader);
    let csv_err = |source| Error::Csv {
        path: path.clone(),
        source,
    };
    let header: Vec<String> = rdr
        .headers()
        .map_err(csv_err)?
        .iter()
        .map(|h| h.trim().trim_start_matches('\u{feff}').to_string())
        .collect();
    if header.iter().map(String::as_str).ne(SAMPLE_HEADER) {
        return Err(Error::MalformedHeader {
            path,
            expected: SAMPLE_HEADER.join(","),
            found: header.join(","),
        });
    }
    let mut countries = Vec::new();
    let mut values = Vec::new();
    for row in rdr.records() {
        let row = row.map_err(csv_err)?;
        let line = row.position().map_or(0, |p| p.line());
        let code = row.get(0).unwrap_or("").trim().to_string();
        let raw = row.get(1).unwrap_or("").trim();
        match raw.parse::<f64>() {
            Ok(v) if v.is_finite() && v > 0.0 => {
                countries.push(code);
                values.push(v);
            }
            _ => {
                return Err(Error::InvalidRow {
                    path,
                    line,
                    message: format!("value `{raw}` for `{code}` is not a positive number"),
                })
            }
        }
    }
    Ok((countries, Sample::new(values)?))
}

pub fn load_sample_csv(path: impl AsRef<Path>) -> Result<(Vec<String>, Sample)> {
    let path = path.as_ref();
    let file = std::fs::File::open(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    read_sample_csv(file, path)
}
