//! `signpipe kb build` and `signpipe kb validate`.

use std::path::PathBuf;

use anyhow::{bail, Context, Result};
use serde::{Deserialize, Serialize};

use signpipe_core::cvr::{EmbeddingProvider, HashedNgramEmbedder};
use signpipe_core::kb::{load_kb, parse_entry_record, save_kb, validate_kb, KnowledgeBase};

use super::Ctx;

/// How to fill entries that arrive without an embedding.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EmbedFill {
    /// Leave missing embeddings empty.
    None,
    /// Embed the symbol text with the hashed n-gram embedder.
    Hashed,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct KbBuildConfig {
    pub input: PathBuf,
    pub output: PathBuf,
    pub embedding_dim: usize,
    pub embed: EmbedFill,
    pub manifest: Option<PathBuf>,
}

impl KbBuildConfig {
    pub fn execute(&self, ctx: &Ctx) -> Result<()> {
        let text = std::fs::read_to_string(&self.input)
            .with_context(|| format!("cannot read {}", self.input.display()))?;
        let mut kb = KnowledgeBase::new(self.embedding_dim);
        let embedder = HashedNgramEmbedder::new(self.embedding_dim.max(1));
        for (i, line) in text.lines().enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            let mut entry = parse_entry_record(line, i + 1)?;
            if entry.embedding.is_none() && self.embed == EmbedFill::Hashed {
                entry.embedding = Some(
                    embedder
                        .embed(&entry.symbol)
                        .map_err(|e| anyhow::anyhow!("line {}: {e}", i + 1))?,
                );
            }
            kb.push(entry);
        }

        let report = validate_kb(&kb);
        if !report.is_valid() {
            for violation in &report.violations {
                eprintln!("violation: {violation}");
            }
            bail!(
                "knowledge base has {} violation(s)",
                report.violations.len()
            );
        }
        save_kb(&kb, &self.output)?;
        ctx.note(format!(
            "wrote {} entries (dim {}) to {}",
            kb.len(),
            kb.embedding_dim(),
            self.output.display()
        ));
        Ok(())
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct KbValidateConfig {
    pub kb: PathBuf,
}

#[derive(Serialize)]
struct ValidateOut {
    valid: bool,
    entries: usize,
    violations: Vec<String>,
}

impl KbValidateConfig {
    pub fn execute(&self, ctx: &Ctx) -> Result<()> {
        let kb = load_kb(&self.kb)?;
        let report = validate_kb(&kb);
        let out = ValidateOut {
            valid: report.is_valid(),
            entries: kb.len(),
            violations: report.violations.iter().map(|v| v.to_string()).collect(),
        };
        if ctx.json_stdout() {
            println!("{}", serde_json::to_string(&out)?);
        } else {
            for violation in &out.violations {
                println!("violation: {violation}");
            }
            println!(
                "{}: {} entries, {}",
                self.kb.display(),
                out.entries,
                if out.valid { "valid" } else { "INVALID" }
            );
        }
        if !out.valid {
            bail!("knowledge base has {} violation(s)", out.violations.len());
        }
        Ok(())
    }
}
