use std::fs;
use std::path::{Path, PathBuf};

use clap::ValueEnum;
use serde::{Deserialize, Serialize};
use serde_json::json;
use trade_strength::modelselect::{cdf_comparison, select_with};
use trade_strength::strength::load_sample_csv;
use trade_strength::{Family, ParetoLikelihood, Params, Sample};

use crate::failure::{CmdResult, Failure};
use crate::manifest::{write_manifest, ManifestInput};
use crate::output::{diagnostic, Outputs, Table};
use crate::Context;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ParetoVariant {
    Standard,
    Literal,
}

impl From<ParetoVariant> for ParetoLikelihood {
    fn from(v: ParetoVariant) -> Self {
        match v {
            ParetoVariant::Standard => ParetoLikelihood::Standard,
            ParetoVariant::Literal => ParetoLikelihood::Literal,
        }
    }
}

#[derive(Debug, clap::Args, Serialize)]
pub struct Args {
    /// Sample file with columns country_code,value (CSV, or JSON by extension).
    #[arg(long)]
    pub sample: PathBuf,
    /// Closed form reported as the Pareto log-likelihood.
    #[arg(long, value_enum, default_value_t = ParetoVariant::Standard)]
    pub pareto_likelihood: ParetoVariant,
}

#[derive(Deserialize)]
struct JsonRow {
    country_code: String,
    value: Option<f64>,
}

fn load_json_sample(path: &Path) -> CmdResult<Sample> {
    let text = fs::read_to_string(path)
        .map_err(|e| Failure::data(anyhow::anyhow!("cannot read {}: {e}", path.display())))?;
    let rows: Vec<JsonRow> = serde_json::from_str(&text)
        .map_err(|e| Failure::data(anyhow::anyhow!("{}: {e}", path.display())))?;
    let mut values = Vec::with_capacity(rows.len());
    for (i, row) in rows.iter().enumerate() {
        match row.value {
            Some(v) if v.is_finite() && v > 0.0 => values.push(v),
            v => {
                return Err(Failure::data(anyhow::anyhow!(
                    "{}: row {}: value {v:?} for `{}` is not a positive number",
                    path.display(),
                    i + 1,
                    row.country_code
                )))
            }
        }
    }
    Ok(Sample::new(values)?)
}

fn load_sample(path: &Path) -> CmdResult<Sample> {
    let is_json = path
        .extension()
        .is_some_and(|e| e.eq_ignore_ascii_case("json"));
    if is_json {
        load_json_sample(path)
    } else {
        Ok(load_sample_csv(path)?.1)
    }
}

fn params_text(p: &Params) -> String {
    p.named()
        .iter()
        .map(|(k, v)| format!("{k}={v}"))
        .collect::<Vec<_>>()
        .join(";")
}

pub fn run(ctx: &Context, args: Args) -> CmdResult<()> {
    let sample = load_sample(&args.sample)?;
    let report = select_with(&sample, args.pareto_likelihood.into())?;
    for failure in &report.failures {
        diagnostic("fit_failed", json!({ "family": failure.family, "reason": failure.reason }));
    }
    let stem = args
        .sample
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "sample".into());

    let mut outputs = Outputs::new(&ctx.out_dir)?;
    let mut scores = Table::new(&["family", "k", "n", "ll_max", "aic", "aicc", "bic", "params"]);
    for s in &report.scores {
        let params = report
            .fit_for(s.family)
            .map(|f| params_text(&f.params))
            .unwrap_or_default();
        scores.push(vec![
            s.family.name().into(),
            s.k.into(),
            s.n.into(),
            s.ll_max.into(),
            s.aic.into(),
            s.aicc.into(),
            s.bic.into(),
            params.into(),
        ]);
    }
    outputs.table(&format!("fit_{stem}_scores"), &scores, ctx.format)?;
    outputs.json(&format!("fit_{stem}_report.json"), &report)?;

    match report.fit_for(Family::Pareto).map(|f| f.params) {
        Some(Params::Pareto { alpha, .. }) => {
            let mut cdf = Table::new(&["g", "empirical", "scaled_pareto"]);
            for p in cdf_comparison(&sample, alpha)? {
                cdf.push(vec![p.g.into(), p.empirical.into(), p.scaled_pareto.into()]);
            }
            outputs.table(&format!("cdf_{stem}"), &cdf, ctx.format)?;
        }
        _ => diagnostic("cdf_skipped", json!({ "reason": "pareto fit unavailable" })),
    }

    write_manifest(
        &mut outputs,
        ManifestInput {
            command: "fit",
            args: &ctx.argv,
            inputs: std::slice::from_ref(&args.sample),
            params: serde_json::to_value(&args).map_err(Failure::data)?,
            seed: None,
        },
    )?;
    Ok(())
}
