use std::path::PathBuf;

use serde::Serialize;
use serde_json::json;
use trade_strength::cluster::{best_of_restarts, choose_k_elbow, fit_curve, DEFAULT_MAX_ITER};
use trade_strength::ClusterInput;

use super::load_panel;
use crate::failure::{CmdResult, Failure};
use crate::manifest::{write_manifest, ManifestInput};
use crate::output::{diagnostic, Outputs, Table};
use crate::Context;

#[derive(Debug, clap::Args, Serialize)]
pub struct Args {
    #[arg(long)]
    pub trade: PathBuf,
    #[arg(long)]
    pub gdp: PathBuf,
    #[arg(long)]
    pub year: i32,
    /// Number of clusters.
    #[arg(long, required_unless_present = "auto_k", conflicts_with = "auto_k")]
    pub k: Option<usize>,
    /// Pick k at the elbow of the inertia curve.
    #[arg(long)]
    pub auto_k: bool,
    /// Largest k on the inertia curve.
    #[arg(long, default_value_t = 10)]
    pub k_max: usize,
    /// Lloyd iteration cap for a fixed k.
    #[arg(long, default_value_t = DEFAULT_MAX_ITER)]
    pub max_iter: usize,
}

#[derive(Debug, Serialize)]
struct Summary<'a> {
    year: i32,
    k: usize,
    auto_k: bool,
    seed: u64,
    inertia: f64,
    iterations: usize,
    converged: bool,
    sizes: Vec<usize>,
    centroids: &'a [[f64; 2]],
}

pub fn run(ctx: &Context, args: Args) -> CmdResult<()> {
    if args.k_max == 0 {
        return Err(Failure::config(anyhow::anyhow!("--k-max must be at least 1")));
    }
    if args.max_iter == 0 {
        return Err(Failure::config(anyhow::anyhow!("--max-iter must be at least 1")));
    }
    let seed = ctx.seed.unwrap_or(0);
    let load = load_panel(&args.trade, &args.gdp)?;
    let input = ClusterInput::from_panel(&load.panel, args.year)?;

    let fixed = match args.k {
        Some(k) => Some(best_of_restarts(&input, k, seed, args.max_iter)?),
        None => None,
    };
    if args.k_max > input.len() {
        diagnostic("k_max_clamped", json!({ "requested": args.k_max, "points": input.len() }));
    }
    let curve_fits = fit_curve(&input, args.k_max.min(input.len()), seed)?;
    let curve: Vec<(usize, f64)> = curve_fits.iter().map(|r| (r.k, r.inertia)).collect();
    let result = match fixed {
        Some(result) => result,
        None => {
            let k = choose_k_elbow(&curve)?;
            diagnostic("elbow", json!({ "k": k }));
            curve_fits[k - 1].clone()
        }
    };

    let mut outputs = Outputs::new(&ctx.out_dir)?;
    let mut assignments = Table::new(&["country_code", "cluster_id"]);
    for (code, id) in &result.assignments {
        assignments.push(vec![code.as_str().into(), (*id).into()]);
    }
    outputs.table(&format!("clusters_{}", args.year), &assignments, ctx.format)?;
    let mut inertia = Table::new(&["k", "inertia"]);
    for (k, v) in &curve {
        inertia.push(vec![(*k).into(), (*v).into()]);
    }
    outputs.table(&format!("inertia_{}", args.year), &inertia, ctx.format)?;
    let summary = Summary {
        year: args.year,
        k: result.k,
        auto_k: args.auto_k,
        seed,
        inertia: result.inertia,
        iterations: result.iterations,
        converged: result.converged,
        sizes: result.sizes(),
        centroids: &result.centroids,
    };
    outputs.json(&format!("clusters_{}_summary.json", args.year), &summary)?;

    let mut params = serde_json::to_value(&args).map_err(Failure::data)?;
    params["chosen_k"] = json!(result.k);
    write_manifest(
        &mut outputs,
        ManifestInput {
            command: "cluster",
            args: &ctx.argv,
            inputs: &[args.trade.clone(), args.gdp.clone()],
            params,
            seed: Some(seed),
        },
    )?;
    Ok(())
}
