use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::json;
use trade_strength::forecast::{backtest, forecast_series};
use trade_strength::{Error, GrowthPath};

use super::load_panel;
use crate::failure::{CmdResult, Failure};
use crate::manifest::{write_manifest, ManifestInput};
use crate::output::{diagnostic, Outputs, Table};
use crate::Context;

const FUTURE_HEADER: [&str; 3] = ["year", "gdp_usd", "gdp_growth_pct"];

#[derive(Debug, clap::Args, Serialize)]
pub struct Args {
    #[arg(long)]
    pub trade: PathBuf,
    #[arg(long)]
    pub gdp: PathBuf,
    /// Country code as it appears in both tables.
    #[arg(long)]
    pub country: String,
    #[arg(long)]
    pub base_year: i32,
    #[arg(long)]
    pub target_year: i32,
    /// Projected GDP and growth for years past the panel: year,gdp_usd,gdp_growth_pct.
    #[arg(long)]
    pub future: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy)]
struct YearInputs {
    gdp: Option<f64>,
    growth: Option<f64>,
}

fn read_future(path: &Path) -> CmdResult<BTreeMap<i32, YearInputs>> {
    let mut rdr = csv::Reader::from_path(path)
        .map_err(|e| Failure::data(anyhow::anyhow!("{}: {e}", path.display())))?;
    let header: Vec<String> = rdr
        .headers()
        .map_err(|e| Failure::data(anyhow::anyhow!("{}: {e}", path.display())))?
        .iter()
        .map(|h| h.trim().trim_start_matches('\u{feff}').to_string())
        .collect();
    if header.iter().map(String::as_str).ne(FUTURE_HEADER) {
        return Err(Failure::data(anyhow::anyhow!(
            "{}: malformed header, expected `{}`, found `{}`",
            path.display(),
            FUTURE_HEADER.join(","),
            header.join(",")
        )));
    }
    let mut out = BTreeMap::new();
    for row in rdr.records() {
        let row = row.map_err(|e| Failure::data(anyhow::anyhow!("{}: {e}", path.display())))?;
        let line = row.position().map_or(0, |p| p.line());
        let bad = |field: &str, raw: &str| {
            Failure::data(anyhow::anyhow!("{}:{line}: invalid {field} `{raw}`", path.display()))
        };
        let raw_year = row.get(0).unwrap_or("").trim();
        let year: i32 = raw_year.parse().map_err(|_| bad("year", raw_year))?;
        let number = |i: usize, field: &str| -> CmdResult<Option<f64>> {
            let raw = row.get(i).unwrap_or("").trim();
            if raw.is_empty() {
                return Ok(None);
            }
            match raw.parse::<f64>() {
                Ok(v) if v.is_finite() => Ok(Some(v)),
                _ => Err(bad(field, raw)),
            }
        };
        let gdp = number(1, "gdp_usd")?;
        if gdp.is_some_and(|g| g <= 0.0) {
            return Err(bad("gdp_usd", row.get(1).unwrap_or("")));
        }
        let growth = number(2, "gdp_growth_pct")?.map(|p| p / 100.0);
        if out.insert(year, YearInputs { gdp, growth }).is_some() {
            return Err(Failure::data(anyhow::anyhow!("{}:{line}: duplicate year {year}", path.display())));
        }
    }
    Ok(out)
}

#[derive(Debug, Serialize)]
struct Summary {
    country: String,
    base_year: i32,
    target_year: i32,
    base_trade: f64,
    base_gdp: f64,
    target_forecast: f64,
    /// Forecast over base-year trade.
    ratio: f64,
    backtest_rmse: Option<f64>,
    backtest_correlation: Option<f64>,
}

pub fn run(ctx: &Context, args: Args) -> CmdResult<()> {
    if args.target_year < args.base_year {
        return Err(Failure::config(anyhow::anyhow!(
            "--target-year {} precedes --base-year {}",
            args.target_year,
            args.base_year
        )));
    }
    let load = load_panel(&args.trade, &args.gdp)?;
    let rows = load.panel.country(&args.country);
    let base = rows.get(&args.base_year).ok_or_else(|| Error::MissingYears {
        context: format!("{} panel rows", args.country),
        years: vec![args.base_year],
    })?;

    let mut years: BTreeMap<i32, YearInputs> = rows
        .iter()
        .filter(|(&y, _)| y > args.base_year)
        .map(|(&y, r)| {
            (
                y,
                YearInputs {
                    gdp: Some(r.gdp),
                    growth: r.gdp_growth,
                },
            )
        })
        .collect();
    if let Some(path) = &args.future {
        for (y, future) in read_future(path)? {
            let slot = years.entry(y).or_insert(YearInputs { gdp: None, growth: None });
            slot.gdp = future.gdp.or(slot.gdp);
            slot.growth = future.growth.or(slot.growth);
        }
    }

    let window = args.base_year + 1..=args.target_year;
    let missing_growth: Vec<i32> = window
        .clone()
        .filter(|y| years.get(y).and_then(|v| v.growth).is_none())
        .collect();
    if !missing_growth.is_empty() {
        return Err(Error::MissingYears {
            context: format!("{} GDP growth", args.country),
            years: missing_growth,
        }
        .into());
    }
    let missing_gdp: Vec<i32> = window
        .clone()
        .filter(|y| years.get(y).and_then(|v| v.gdp).is_none())
        .collect();
    if !missing_gdp.is_empty() {
        return Err(Error::MissingYears {
            context: format!("{} GDP", args.country),
            years: missing_gdp,
        }
        .into());
    }

    let growth = GrowthPath::new(
        args.base_year,
        window.clone().map(|y| (y, years[&y].growth.unwrap_or_default())),
    )?;
    let mut gdp_path: BTreeMap<i32, f64> = window.map(|y| (y, years[&y].gdp.unwrap_or_default())).collect();
    gdp_path.insert(args.base_year, base.gdp);
    let series = forecast_series(base.trade_total, base.gdp, &gdp_path, &growth, args.target_year)?;

    let observed_covers = args.target_year > args.base_year
        && (args.base_year..=args.target_year).all(|y| rows.get(&y).is_some_and(|r| r.gdp_growth.is_some() || y == args.base_year));
    let check = if observed_covers {
        match backtest(&load.panel, &args.country, args.base_year, args.target_year) {
            Ok(b) => Some(b),
            Err(e) => {
                diagnostic("backtest_skipped", json!({ "reason": e.to_string() }));
                None
            }
        }
    } else {
        None
    };

    let mut outputs = Outputs::new(&ctx.out_dir)?;
    let mut table = Table::new(&["year", "forecast", "normalized", "observed"]);
    for row in &series.rows {
        let observed = rows.get(&row.year).map(|r| r.trade_total);
        table.push(vec![row.year.into(), row.forecast.into(), row.normalized.into(), observed.into()]);
    }
    outputs.table(&format!("forecast_{}", args.country), &table, ctx.format)?;

    let last = series.rows.last().map_or(base.trade_total, |r| r.forecast);
    let summary = Summary {
        country: args.country.clone(),
        base_year: args.base_year,
        target_year: args.target_year,
        base_trade: base.trade_total,
        base_gdp: base.gdp,
        target_forecast: last,
        ratio: last / base.trade_total,
        backtest_rmse: check.as_ref().map(|b| b.rmse),
        backtest_correlation: check.as_ref().map(|b| b.correlation),
    };
    outputs.json(&format!("forecast_{}_summary.json", args.country), &summary)?;

    let mut inputs = vec![args.trade.clone(), args.gdp.clone()];
    inputs.extend(args.future.iter().cloned());
    write_manifest(
        &mut outputs,
        ManifestInput {
            command: "forecast",
            args: &ctx.argv,
            inputs: &inputs,
            params: serde_json::to_value(&args).map_err(Failure::data)?,
            seed: None,
        },
    )?;
    Ok(())
}
