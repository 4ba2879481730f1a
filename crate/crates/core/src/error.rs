use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("cannot read {}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{}: {source}", path.display())]
    Csv {
        path: PathBuf,
        #[source]
        source: csv::Error,
    },

    #[error("{}: malformed header, expected `{expected}`, found `{found}`", path.display())]
    MalformedHeader {
        path: PathBuf,
        expected: String,
        found: String,
    },

    #[error("duplicate key {key}")]
    DuplicateKey { key: String },

    #[error("{}:{line}: {message}", path.display())]
    InvalidRow {
        path: PathBuf,
        line: u64,
        message: String,
    },

    #[error("panel join produced no rows")]
    EmptyJoin,

    #[error("no usable rows for year {year}")]
    NoRowsForYear { year: i32 },

    #[error("degenerate scale: {context}")]
    DegenerateScale { context: String },

    #[error("insufficient data for {context}: need {needed}, got {got}")]
    InsufficientData {
        context: String,
        needed: usize,
        got: usize,
    },

    #[error("{what} did not converge after {iterations} iterations")]
    NoConvergence { what: String, iterations: usize },

    #[error("invalid parameter `{name}` = {value}: {reason}")]
    InvalidParameter {
        name: String,
        value: f64,
        reason: String,
    },

    #[error("{function} undefined at x = {x}")]
    Domain { function: &'static str, x: f64 },

    #[error("missing data for {context} in years {years:?}")]
    MissingYears { context: String, years: Vec<i32> },

    #[error("fewer than two families could be fitted ({fitted} succeeded)")]
    SelectionFailed { fitted: usize },
}

impl Error {
    /// True when the error stems from user-supplied configuration rather than
    /// from the contents of a data file.
    pub fn is_config(&self) -> bool {
        matches!(self, Error::InvalidParameter { .. })
    }

    pub(crate) fn invalid(name: &str, value: f64, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name: name.to_string(),
            value,
            reason: reason.into(),
        }
    }

    pub(crate) fn degenerate(context: impl Into<String>) -> Self {
        Error::DegenerateScale {
            context: context.into(),
        }
    }
}
