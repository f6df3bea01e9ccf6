//! Run manifests: the fully resolved configuration plus content digests of
//! every input, written next to each run's primary output. `signpipe rerun`
//! replays a manifest and, because every stage is seed-deterministic,
//! reproduces the outputs byte for byte; digest checks make stale-input
//! reuse detectable.

use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::commands::ResolvedCommand;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct InputDigest {
    pub path: String,
    pub sha256: String,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct RunManifest {
    pub tool_version: String,
    pub seed: u64,
    pub command: ResolvedCommand,
    pub inputs: Vec<InputDigest>,
}

pub fn sha256_hex(path: &Path) -> Result<String> {
    let bytes = std::fs::read(path)
        .with_context(|| format!("cannot read input {}", path.display()))?;
    Ok(hex::encode(Sha256::digest(&bytes)))
}

pub fn digest_inputs(paths: &[PathBuf]) -> Result<Vec<InputDigest>> {
    paths
        .iter()
        .map(|p| {
            Ok(InputDigest {
                path: p.display().to_string(),
                sha256: sha256_hex(p)?,
            })
        })
        .collect()
}

pub fn write_manifest(manifest: &RunManifest, path: &Path) -> Result<()> {
    let json = serde_json::to_string_pretty(manifest)?;
    std::fs::write(path, json + "\n")
        .with_context(|| format!("cannot write manifest {}", path.display()))?;
    Ok(())
}

pub fn read_manifest(path: &Path) -> Result<RunManifest> {
    let text = std::fs::read_to_string(path)
        .with_context(|| format!("cannot read manifest {}", path.display()))?;
    serde_json::from_str(&text)
        .with_context(|| format!("malformed manifest {}", path.display()))
}

/// Fails when any recorded input no longer matches its digest.
pub fn verify_inputs(manifest: &RunManifest) -> Result<()> {
    for input in &manifest.inputs {
        let current = sha256_hex(Path::new(&input.path))?;
        if current != input.sha256 {
            bail!(
                "input {} changed since the manifest was written (expected sha256 {}, found {})",
                input.path,
                input.sha256,
                current
            );
        }
    }
    Ok(())
}

/// Default manifest location: `<output>.manifest.json`.
pub fn default_manifest_path(output: &Path) -> PathBuf {
    PathBuf::from(format!("{}.manifest.json", output.display()))
}
