//! `trade-strength`: batch pipeline over trade and GDP tables.
//!
//! Exit codes: 0 on success, 1 for data errors, 2 for configuration errors.

mod commands;
mod failure;
mod manifest;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use crate::commands::{cluster, fit, forecast, replay, simulate, strength};
use crate::failure::CmdResult;
use crate::output::Format;

#[derive(Debug, Parser)]
#[command(name = "trade-strength", version, about = "Trade strength statistics pipeline")]
pub struct Cli {
    /// Seed for every random draw in the command.
    #[arg(long, global = true)]
    pub seed: Option<u64>,

    /// Directory receiving all output files.
    #[arg(long, global = true, default_value = ".")]
    pub out_dir: PathBuf,

    /// Encoding of tabular outputs. Reports and manifests are always JSON.
    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    pub format: Format,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Compute per-country trade strength g and strength rate |f| for a year.
    Strength(strength::Args),
    /// Fit five distribution families to a sample and rank them by AIC and BIC.
    Fit(fit::Args),
    /// Monte Carlo tail experiment for the diplomatic-distance model.
    Simulate(simulate::Args),
    /// Forecast a country's total trade from GDP and growth paths.
    Forecast(forecast::Args),
    /// k-means clustering of countries on standardized GDP and g.
    Cluster(cluster::Args),
    /// Re-run a recorded manifest and compare output digests.
    Replay(replay::Args),
}

/// Shared settings handed to every command.
pub struct Context {
    pub seed: Option<u64>,
    pub out_dir: PathBuf,
    pub format: Format,
    /// Raw arguments after the program name.
    pub argv: Vec<String>,
}

pub fn dispatch(cli: Cli, argv: Vec<String>) -> CmdResult<()> {
    let ctx = Context {
        seed: cli.seed,
        out_dir: cli.out_dir,
        format: cli.format,
        argv,
    };
    match cli.command {
        Command::Strength(a) => strength::run(&ctx, a),
        Command::Fit(a) => fit::run(&ctx, a),
        Command::Simulate(a) => simulate::run(&ctx, a),
        Command::Forecast(a) => forecast::run(&ctx, a),
        Command::Cluster(a) => cluster::run(&ctx, a),
        Command::Replay(a) => replay::run(&ctx, a),
    }
}

fn main() -> ExitCode {
    let argv: Vec<String> = std::env::args().skip(1).collect();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match dispatch(cli, argv) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            output::diagnostic("error", serde_json::json!({ "kind": e.kind(), "message": e.to_string() }));
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
