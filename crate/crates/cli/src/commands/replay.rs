use std::path::PathBuf;

use clap::Parser;
use serde_json::json;

use crate::failure::{CmdResult, Failure};
use crate::manifest::{read_manifest, sha256_file};
use crate::output::diagnostic;
use crate::{dispatch, Cli, Command, Context};

#[derive(Debug, clap::Args)]
pub struct Args {
    /// Manifest written by an earlier run.
    pub manifest: PathBuf,
}

fn absolute(path: &std::path::Path) -> CmdResult<PathBuf> {
    std::path::absolute(path).map_err(|e| Failure::config(anyhow::anyhow!("{}: {e}", path.display())))
}

/// Re-runs the recorded command into `--out-dir` and compares digests.
pub fn run(ctx: &Context, args: Args) -> CmdResult<()> {
    let manifest = read_manifest(&args.manifest)?;
    let out_dir = absolute(&ctx.out_dir)?;
    let original_dir = absolute(args.manifest.parent().unwrap_or(std::path::Path::new(".")))?;
    std::fs::create_dir_all(&out_dir)
        .map_err(|e| Failure::data(anyhow::anyhow!("cannot create {}: {e}", out_dir.display())))?;
    let same = match (out_dir.canonicalize(), original_dir.canonicalize()) {
        (Ok(a), Ok(b)) => a == b,
        _ => false,
    };
    if same {
        return Err(Failure::config(anyhow::anyhow!(
            "--out-dir must differ from the directory holding the manifest"
        )));
    }
    if manifest.version != env!("CARGO_PKG_VERSION") {
        diagnostic(
            "version_mismatch",
            json!({ "recorded": manifest.version, "current": env!("CARGO_PKG_VERSION") }),
        );
    }

    std::env::set_current_dir(&manifest.working_dir).map_err(|e| {
        Failure::config(anyhow::anyhow!(
            "cannot enter recorded working directory {}: {e}",
            manifest.working_dir.display()
        ))
    })?;
    let mut argv = manifest.args.clone();
    argv.push("--out-dir".into());
    argv.push(out_dir.to_string_lossy().into_owned());
    let cli = Cli::try_parse_from(std::iter::once("trade-strength".to_string()).chain(argv.iter().cloned()))
        .map_err(|e| Failure::config(anyhow::anyhow!("recorded arguments no longer parse: {e}")))?;
    if matches!(cli.command, Command::Replay(_)) {
        return Err(Failure::config(anyhow::anyhow!("a replay manifest cannot be replayed")));
    }
    dispatch(cli, argv)?;

    let mut differing = 0;
    for recorded in &manifest.outputs {
        let path = out_dir.join(&recorded.path);
        let actual = sha256_file(&path).ok();
        let matches = actual.as_deref() == Some(recorded.sha256.as_str());
        if !matches {
            differing += 1;
        }
        diagnostic(
            "replay_output",
            json!({
                "path": recorded.path,
                "expected": recorded.sha256,
                "actual": actual,
                "status": if matches { "match" } else { "differ" },
            }),
        );
    }
    if differing > 0 {
        return Err(Failure::data(anyhow::anyhow!(
            "{differing} of {} outputs differ from the manifest",
            manifest.outputs.len()
        )));
    }
    Ok(())
}
