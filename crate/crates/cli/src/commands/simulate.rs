use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;
use trade_strength::theory::run_tail_experiment;
use trade_strength::SimConfig;

use crate::failure::{CmdResult, Failure};
use crate::manifest::{write_manifest, ManifestInput};
use crate::output::{Outputs, Table};
use crate::Context;

#[derive(Debug, clap::Args, Serialize)]
pub struct Args {
    /// TOML file with SimConfig fields; a flat `key = value` list also works.
    /// Missing keys take their defaults.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Also write every simulated point.
    #[arg(long)]
    pub raw: bool,
}

fn read_config(path: &Path) -> CmdResult<SimConfig> {
    let text = fs::read_to_string(path)
        .map_err(|e| Failure::config(anyhow::anyhow!("cannot read config {}: {e}", path.display())))?;
    toml::from_str(&text).map_err(|e| Failure::config(anyhow::anyhow!("config {}: {e}", path.display())))
}

pub fn run(ctx: &Context, args: Args) -> CmdResult<()> {
    let mut config = match &args.config {
        Some(path) => read_config(path)?,
        None => SimConfig::default(),
    };
    if let Some(seed) = ctx.seed {
        config.seed = seed;
    }
    config.validate()?;
    let outcome = run_tail_experiment(&config)?;

    let mut outputs = Outputs::new(&ctx.out_dir)?;
    outputs.json("simulate_report.json", &outcome.report())?;
    if args.raw {
        let mut points = Table::new(&["gdp", "distance", "speed", "g", "f"]);
        for p in &outcome.points {
            points.push(vec![p.gdp.into(), p.distance.into(), p.speed.into(), p.g.into(), p.f.into()]);
        }
        outputs.table("sim_points", &points, ctx.format)?;
    }

    let inputs: Vec<PathBuf> = args.config.iter().cloned().collect();
    write_manifest(
        &mut outputs,
        ManifestInput {
            command: "simulate",
            args: &ctx.argv,
            inputs: &inputs,
            params: serde_json::json!({ "config": config, "raw": args.raw }),
            seed: Some(config.seed),
        },
    )?;
    Ok(())
}
