use std::path::PathBuf;

use serde::Serialize;
use serde_json::json;
use trade_strength::strength::{compute_strength, compute_strength_rate_with, RatePolicy};
use trade_strength::Sign;

use super::load_panel;
use crate::failure::{CmdResult, Failure};
use crate::manifest::{write_manifest, ManifestInput};
use crate::output::{diagnostic, Outputs, Table};
use crate::Context;

#[derive(Debug, clap::Args, Serialize)]
pub struct Args {
    /// Trade table: country_code,year,trade_total_usd.
    #[arg(long)]
    pub trade: PathBuf,
    /// GDP table: country_code,year,gdp_usd,gdp_growth_pct.
    #[arg(long)]
    pub gdp: PathBuf,
    #[arg(long)]
    pub year: i32,
    /// Drop g and |f| values below this threshold.
    #[arg(long)]
    pub min_value: Option<f64>,
    /// Leave shrinking economies out of the |f| sample.
    #[arg(long)]
    pub exclude_negative: bool,
}

#[derive(Debug, Serialize)]
struct Summary<'a> {
    year: i32,
    g_count: usize,
    f_count: usize,
    f_positive: usize,
    f_negative: usize,
    f_zero_growth: &'a [String],
    f_missing_growth: &'a [String],
    f_excluded_negative: &'a [String],
    min_value: Option<f64>,
    g_below_min: usize,
    f_below_min: usize,
    #[serde(flatten)]
    load: &'a super::PanelLoad,
}

/// Keeps entries at or above `min`, returning the kept rows and the drop count.
fn filter_min<T: Clone>(rows: &[(String, f64, T)], min: Option<f64>) -> (Vec<(String, f64, T)>, usize) {
    let Some(min) = min else {
        return (rows.to_vec(), 0);
    };
    let kept: Vec<_> = rows.iter().filter(|r| r.1 >= min).cloned().collect();
    let dropped = rows.len() - kept.len();
    (kept, dropped)
}

pub fn run(ctx: &Context, args: Args) -> CmdResult<()> {
    if let Some(m) = args.min_value {
        if !m.is_finite() {
            return Err(Failure::config(anyhow::anyhow!("--min-value must be finite, got {m}")));
        }
    }
    let load = load_panel(&args.trade, &args.gdp)?;
    let g = compute_strength(&load.panel, args.year)?;
    let policy = RatePolicy {
        exclude_negative: args.exclude_negative,
    };
    let f = compute_strength_rate_with(&load.panel, args.year, policy)?;

    let g_rows: Vec<(String, f64, ())> = g
        .countries
        .iter()
        .zip(g.values.values())
        .map(|(c, &v)| (c.clone(), v, ()))
        .collect();
    let f_rows: Vec<(String, f64, Sign)> = f
        .countries
        .iter()
        .zip(f.values.values())
        .zip(&f.signs)
        .map(|((c, &v), &s)| (c.clone(), v, s))
        .collect();
    let (g_rows, g_dropped) = filter_min(&g_rows, args.min_value);
    let (f_rows, f_dropped) = filter_min(&f_rows, args.min_value);
    if args.min_value.is_some() {
        diagnostic(
            "min_value_filter",
            json!({ "threshold": args.min_value, "g_removed": g_dropped, "f_removed": f_dropped }),
        );
    }
    if g_rows.is_empty() {
        return Err(Failure::data(anyhow::anyhow!(
            "no g values remain for {} after --min-value filtering",
            args.year
        )));
    }

    let mut outputs = Outputs::new(&ctx.out_dir)?;
    let mut g_table = Table::new(&["country_code", "value"]);
    for (c, v, _) in &g_rows {
        g_table.push(vec![c.as_str().into(), (*v).into()]);
    }
    outputs.table(&format!("g_{}", args.year), &g_table, ctx.format)?;

    let mut f_table = Table::new(&["country_code", "value"]);
    let mut sign_table = Table::new(&["country_code", "sign"]);
    for (c, v, s) in &f_rows {
        f_table.push(vec![c.as_str().into(), (*v).into()]);
        let sign = match s {
            Sign::Positive => "positive",
            Sign::Negative => "negative",
        };
        sign_table.push(vec![c.as_str().into(), sign.into()]);
    }
    outputs.table(&format!("f_{}", args.year), &f_table, ctx.format)?;
    outputs.table(&format!("f_{}_signs", args.year), &sign_table, ctx.format)?;

    let positive = f_rows.iter().filter(|r| r.2 == Sign::Positive).count();
    let summary = Summary {
        year: args.year,
        g_count: g_rows.len(),
        f_count: f_rows.len(),
        f_positive: positive,
        f_negative: f_rows.len() - positive,
        f_zero_growth: &f.excluded_zero,
        f_missing_growth: &f.missing_growth,
        f_excluded_negative: &f.excluded_negative,
        min_value: args.min_value,
        g_below_min: g_dropped,
        f_below_min: f_dropped,
        load: &load,
    };
    outputs.json(&format!("strength_{}_summary.json", args.year), &summary)?;

    write_manifest(
        &mut outputs,
        ManifestInput {
            command: "strength",
            args: &ctx.argv,
            inputs: &[args.trade.clone(), args.gdp.clone()],
            params: serde_json::to_value(&args).map_err(Failure::data)?,
            seed: None,
        },
    )?;
    Ok(())
}
