//! Total-trade forecasts from a GDP path and a growth-rate path.
//!
//! Trade strength follows dg/dt ≈ g · G_gr, so
//! `F(t) = F(t0) · G(t)/G(t0) · exp(Σ G_gr)` with the sum taken over the
//! years `t0+1 ..= t` (one-year steps, growth as a fraction).

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::dataset::{zscore_normalize, CountryPanel};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GrowthPath {
    base_year: i32,
    rates: BTreeMap<i32, f64>,
}

impl GrowthPath {
    /// Rates must cover a contiguous run of years starting at `base_year + 1`.
    pub fn new(base_year: i32, rates: impl IntoIterator<Item = (i32, f64)>) -> Result<Self> {
        let mut map = BTreeMap::new();
        for (year, rate) in rates {
            if year <= base_year {
                return Err(Error::invalid(
                    &format!("growth[{year}]"),
                    rate,
                    format!("year must be after base year {base_year}"),
                ));
            }
            if !rate.is_finite() {
                return Err(Error::invalid(&format!("growth[{year}]"), rate, "must be finite"));
            }
            if map.insert(year, rate).is_some() {
                return Err(Error::DuplicateKey {
                    key: format!("growth/{year}"),
                });
            }
        }
        if let Some(&last) = map.keys().next_back() {
            let gaps: Vec<i32> = (base_year + 1..=last).filter(|y| !map.contains_key(y)).collect();
            if !gaps.is_empty() {
                return Err(Error::MissingYears {
                    context: "growth path".into(),
                    years: gaps,
                });
            }
        }
        Ok(GrowthPath {
            base_year,
            rates: map,
        })
    }

    pub fn base_year(&self) -> i32 {
        self.base_year
    }

    pub fn last_year(&self) -> i32 {
        self.rates.keys().next_back().copied().unwrap_or(self.base_year)
    }

    pub fn rates(&self) -> &BTreeMap<i32, f64> {
        &self.rates
    }

    /// The part of this path after `year`, rebased there.
    pub fn rebase(&self, year: i32) -> Result<GrowthPath> {
        GrowthPath::new(year, self.rates.range(year + 1..).map(|(&y, &r)| (y, r)))
    }
}

/// Σ growth over `base_year+1 ..= target_year`, in one-year steps.
pub fn growth_integral(path: &GrowthPath, target_year: i32) -> Result<f64> {
    if target_year < path.base_year {
        return Err(Error::invalid(
            "target_year",
            f64::from(target_year),
            format!("precedes base year {}", path.base_year),
        ));
    }
    if target_year > path.last_year() {
        return Err(Error::MissingYears {
            context: "growth path".into(),
            years: (path.last_year() + 1..=target_year).collect(),
        });
    }
    Ok(path.rates.range(..=target_year).map(|(_, r)| r).sum())
}

/// Trade in `target` given base-year trade `f0`, base-year GDP `g0`, a GDP
/// path and a growth path anchored at the base year.
pub fn forecast_trade(
    f0: f64,
    g0: f64,
    gdp_path: &BTreeMap<i32, f64>,
    growth: &GrowthPath,
    target: i32,
) -> Result<f64> {
    if !(f0 >= 0.0 && f0.is_finite()) {
        return Err(Error::invalid("f0", f0, "must be non-negative"));
    }
    if !(g0 > 0.0 && g0.is_finite()) {
        return Err(Error::invalid("g0", g0, "must be positive"));
    }
    let integral = growth_integral(growth, target)?;
    if target == growth.base_year {
        return Ok(f0);
    }
    let g_t = *gdp_path.get(&target).ok_or_else(|| Error::MissingYears {
        context: "GDP path".into(),
        years: vec![target],
    })?;
    Ok(f0 * (g_t / g0) * integral.exp())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ForecastRow {
    pub year: i32,
    pub forecast: f64,
    /// Z-score within the series; absent for single-point or flat series.
    pub normalized: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ForecastSeries {
    pub rows: Vec<ForecastRow>,
}

/// Forecasts every year from the base year through `target`.
pub fn forecast_series(
    f0: f64,
    g0: f64,
    gdp_path: &BTreeMap<i32, f64>,
    growth: &GrowthPath,
    target: i32,
) -> Result<ForecastSeries> {
    let values: Vec<(i32, f64)> = (growth.base_year..=target)
        .map(|y| forecast_trade(f0, g0, gdp_path, growth, y).map(|v| (y, v)))
        .collect::<Result<_>>()?;
    let normalized = normalize_series(&values).ok();
    let rows = values
        .iter()
        .enumerate()
        .map(|(i, &(year, forecast))| ForecastRow {
            year,
            forecast,
            normalized: normalized.as_ref().map(|n| n[i].1),
        })
        .collect();
    Ok(ForecastSeries { rows })
}

pub fn normalize_series(series: &[(i32, f64)]) -> Result<Vec<(i32, f64)>> {
    let values: Vec<f64> = series.iter().map(|&(_, v)| v).collect();
    let z = zscore_normalize(&values)?;
    Ok(series.iter().zip(z).map(|(&(y, _), z)| (y, z)).collect())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Backtest {
    pub country: String,
    pub forecast: ForecastSeries,
    pub observed: Vec<(i32, f64)>,
    pub observed_normalized: Vec<(i32, f64)>,
    /// Root-mean-square difference of the two normalized series.
    pub rmse: f64,
    /// Pearson correlation between forecast and observed trade.
    pub correlation: f64,
}

/// Forecasts from `base_year` with observed GDP and growth and compares the
/// normalized forecast with normalized observed trade.
pub fn backtest(panel: &CountryPanel, country: &str, base_year: i32, end_year: i32) -> Result<Backtest> {
    if end_year <= base_year {
        return Err(Error::InsufficientData {
            context: "backtest window".into(),
            needed: 2,
            got: (end_year - base_year + 1).max(0) as usize,
        });
    }
    let rows = panel.country(country);
    let missing: Vec<i32> = (base_year..=end_year)
        .filter(|y| !rows.contains_key(y))
        .collect();
    if !missing.is_empty() {
        return Err(Error::MissingYears {
            context: format!("{country} panel rows"),
            years: missing,
        });
    }
    let no_growth: Vec<i32> = (base_year + 1..=end_year)
        .filter(|y| rows[y].gdp_growth.is_none())
        .collect();
    if !no_growth.is_empty() {
        return Err(Error::MissingYears {
            context: format!("{country} GDP growth"),
            years: no_growth,
        });
    }
    let growth = GrowthPath::new(
        base_year,
        (base_year + 1..=end_year).map(|y| (y, rows[&y].gdp_growth.unwrap_or_default())),
    )?;
    let gdp_path: BTreeMap<i32, f64> = (base_year..=end_year).map(|y| (y, rows[&y].gdp)).collect();
    let base = rows[&base_year];
    let forecast = forecast_series(base.trade_total, base.gdp, &gdp_path, &growth, end_year)?;
    let observed: Vec<(i32, f64)> = (base_year..=end_year)
        .map(|y| (y, rows[&y].trade_total))
        .collect();
    let observed_normalized = normalize_series(&observed)?;
    let predicted: Vec<(i32, f64)> = forecast.rows.iter().map(|r| (r.year, r.forecast)).collect();
    let predicted_normalized = normalize_series(&predicted)?;
    let n = observed.len() as f64;
    let rmse = (observed_normalized
        .iter()
        .zip(&predicted_normalized)
        .map(|(a, b)| (a.1 - b.1).powi(2))
        .sum::<f64>()
        / n)
        .sqrt();
    let correlation = observed_normalized
        .iter()
        .zip(&predicted_normalized)
        .map(|(a, b)| a.1 * b.1)
        .sum::<f64>()
        / n;
    Ok(Backtest {
        country: country.to_string(),
        forecast,
        observed,
        observed_normalized,
        rmse,
        correlation,
    })
}
