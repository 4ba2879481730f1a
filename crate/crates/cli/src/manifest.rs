//! Run manifests: enough to re-run a command and check its outputs.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::Value;
use sha2::{Digest, Sha256};

use crate::failure::{CmdResult, Failure};
use crate::output::Outputs;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FileDigest {
    pub path: PathBuf,
    pub sha256: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub command: String,
    /// Command-line arguments without the program name and `--out-dir`.
    pub args: Vec<String>,
    pub working_dir: PathBuf,
    pub inputs: Vec<FileDigest>,
    pub params: Value,
    pub seed: Option<u64>,
    pub version: String,
    /// Paths relative to the output directory.
    pub outputs: Vec<FileDigest>,
}

pub fn sha256_file(path: &Path) -> CmdResult<String> {
    let bytes = fs::read(path)
        .map_err(|e| Failure::data(anyhow::anyhow!("cannot read {}: {e}", path.display())))?;
    Ok(hex::encode(Sha256::digest(&bytes)))
}

pub fn manifest_name(command: &str) -> String {
    format!("{command}_manifest.json")
}

/// Drops `--out-dir <dir>` / `--out-dir=<dir>` so the run can be replayed elsewhere.
pub fn strip_out_dir(args: &[String]) -> Vec<String> {
    let mut out = Vec::with_capacity(args.len());
    let mut skip_next = false;
    for a in args {
        if skip_next {
            skip_next = false;
        } else if a == "--out-dir" {
            skip_next = true;
        } else if !a.starts_with("--out-dir=") {
            out.push(a.clone());
        }
    }
    out
}

pub struct ManifestInput<'a> {
    pub command: &'a str,
    pub args: &'a [String],
    pub inputs: &'a [PathBuf],
    pub params: Value,
    pub seed: Option<u64>,
}

pub fn write_manifest(outputs: &mut Outputs, m: ManifestInput<'_>) -> CmdResult<RunManifest> {
    let inputs = m
        .inputs
        .iter()
        .map(|p| {
            Ok(FileDigest {
                path: fs::canonicalize(p).unwrap_or_else(|_| p.clone()),
                sha256: sha256_file(p)?,
            })
        })
        .collect::<CmdResult<Vec<_>>>()?;
    let files = outputs
        .written()
        .iter()
        .map(|rel| {
            Ok(FileDigest {
                path: rel.clone(),
                sha256: sha256_file(&outputs.dir().join(rel))?,
            })
        })
        .collect::<CmdResult<Vec<_>>>()?;
    let manifest = RunManifest {
        command: m.command.to_string(),
        args: strip_out_dir(m.args),
        working_dir: std::env::current_dir().map_err(Failure::data)?,
        inputs,
        params: m.params,
        seed: m.seed,
        version: env!("CARGO_PKG_VERSION").to_string(),
        outputs: files,
    };
    outputs.json(&manifest_name(m.command), &manifest)?;
    Ok(manifest)
}

pub fn read_manifest(path: &Path) -> CmdResult<RunManifest> {
    let text = fs::read_to_string(path)
        .map_err(|e| Failure::config(anyhow::anyhow!("cannot read manifest {}: {e}", path.display())))?;
    serde_json::from_str(&text)
        .map_err(|e| Failure::config(anyhow::anyhow!("invalid manifest {}: {e}", path.display())))
}
