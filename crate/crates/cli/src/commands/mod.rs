//! Resolved subcommand configurations and their execution.
//!
//! Every variant is fully self-describing (paths, tunables, seed), so a
//! serialized [`ResolvedCommand`] inside a run manifest is enough to replay
//! the run exactly.

pub mod corrupt;
pub mod eval;
pub mod kb;
pub mod loss;
pub mod perturb;
pub mod resolve;
pub mod split;

use std::fmt::Display;
use std::path::PathBuf;

use anyhow::Result;
use serde::{Deserialize, Serialize};

use crate::manifest::{self, RunManifest};

/// Output routing shared by all commands.
pub struct Ctx {
    pub quiet: bool,
    /// `None`: human output; `Some("-")`: JSON on stdout; `Some(path)` is
    /// handled per command as a JSON file destination.
    pub json: Option<String>,
}

impl Ctx {
    pub fn note(&self, message: impl Display) {
        if !self.quiet {
            eprintln!("{message}");
        }
    }

    pub fn json_stdout(&self) -> bool {
        self.json.as_deref() == Some("-")
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "subcommand", rename_all = "snake_case")]
pub enum ResolvedCommand {
    KbBuild(kb::KbBuildConfig),
    KbValidate(kb::KbValidateConfig),
    Split(split::SplitConfig),
    Resolve(resolve::ResolveConfig),
    Perturb(perturb::PerturbCommandConfig),
    Loss(loss::LossCommandConfig),
    Corrupt(corrupt::CorruptCommandConfig),
    Eval(eval::EvalCommandConfig),
}

impl ResolvedCommand {
    fn execute(&self, ctx: &Ctx) -> Result<()> {
        match self {
            Self::KbBuild(c) => c.execute(ctx),
            Self::KbValidate(c) => c.execute(ctx),
            Self::Split(c) => c.execute(ctx),
            Self::Resolve(c) => c.execute(ctx),
            Self::Perturb(c) => c.execute(ctx),
            Self::Loss(c) => c.execute(ctx),
            Self::Corrupt(c) => c.execute(ctx),
            Self::Eval(c) => c.execute(ctx),
        }
    }

    fn input_paths(&self) -> Vec<PathBuf> {
        match self {
            Self::KbBuild(c) => vec![c.input.clone()],
            Self::KbValidate(c) => vec![c.kb.clone()],
            Self::Split(c) => vec![c.from.clone()],
            Self::Resolve(c) => vec![c.kb.clone(), c.input.clone()],
            Self::Perturb(c) => vec![c.clip.clone(), c.landmarks.clone()],
            Self::Loss(c) => c.input_paths(),
            Self::Corrupt(c) => c.input_paths(),
            Self::Eval(c) => vec![c.hyp.clone(), c.reference.clone()],
        }
    }

    fn manifest_path(&self) -> Option<PathBuf> {
        let (explicit, output) = match self {
            Self::KbBuild(c) => (c.manifest.clone(), Some(c.output.clone())),
            Self::KbValidate(_) => (None, None),
            Self::Split(c) => (c.manifest.clone(), Some(c.output.clone())),
            Self::Resolve(c) => (c.manifest.clone(), Some(c.output.clone())),
            Self::Perturb(c) => (c.manifest.clone(), Some(c.output.clone())),
            Self::Loss(c) => (c.manifest.clone(), c.output.clone()),
            Self::Corrupt(c) => (c.manifest.clone(), Some(c.output.clone())),
            Self::Eval(c) => (c.manifest.clone(), c.json_out.clone()),
        };
        explicit.or_else(|| output.map(|o| manifest::default_manifest_path(&o)))
    }

    fn seed(&self) -> u64 {
        match self {
            Self::Split(c) => c.seed,
            Self::Perturb(c) => c.seed,
            Self::Corrupt(c) => c.seed,
            _ => 0,
        }
    }
}

/// Digests inputs, executes the command, then writes the run manifest.
pub fn run_command(command: &ResolvedCommand, ctx: &Ctx) -> Result<()> {
    let inputs = manifest::digest_inputs(&command.input_paths())?;
    command.execute(ctx)?;
    if let Some(path) = command.manifest_path() {
        let record = RunManifest {
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            seed: command.seed(),
            command: command.clone(),
            inputs,
        };
        manifest::write_manifest(&record, &path)?;
        ctx.note(format!("manifest: {}", path.display()));
    }
    Ok(())
}

/// Replays a manifest after verifying its input digests.
pub fn rerun(manifest_path: &std::path::Path, ctx: &Ctx) -> Result<()> {
    let record = manifest::read_manifest(manifest_path)?;
    if record.tool_version != env!("CARGO_PKG_VERSION") {
        ctx.note(format!(
            "manifest was written by version {}, running {}",
            record.tool_version,
            env!("CARGO_PKG_VERSION")
        ));
    }
    manifest::verify_inputs(&record)?;
    run_command(&record.command, ctx)
}

pub(crate) fn read_nonempty_lines(path: &std::path::Path) -> Result<Vec<String>> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| anyhow::anyhow!("cannot read {}: {e}", path.display()))?;
    Ok(text
        .lines()
        .map(str::trim_end)
        .filter(|l| !l.trim().is_empty())
        .map(String::from)
        .collect())
}
