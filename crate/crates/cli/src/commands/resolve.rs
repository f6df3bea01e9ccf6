//! `signpipe resolve`: text to symbol-pose sequences through the cascade.

use std::io::Write;
use std::path::PathBuf;

use anyhow::{bail, Context, Result};
use serde::{Deserialize, Serialize};

use signpipe_core::cvr::{
    resolve_sentences, CascadeConfig, HashedNgramEmbedder, ResolutionTrace, SymbolPoseSequence,
    SynonymListBackend, TokenizerKind, UnresolvedPolicy,
};
use signpipe_core::kb::{load_kb, validate_kb};

use super::Ctx;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ResolveConfig {
    pub kb: PathBuf,
    pub input: PathBuf,
    pub output: PathBuf,
    pub accept_threshold: f64,
    pub max_synonyms: usize,
    pub tokenizer: TokenizerKind,
    pub on_unresolved: UnresolvedPolicy,
    pub manifest: Option<PathBuf>,
}

#[derive(Serialize)]
struct ItemOut<'a> {
    symbol: &'a str,
    pose_ref: &'a str,
}

#[derive(Serialize)]
struct SentenceOut<'a> {
    text: &'a str,
    items: Vec<ItemOut<'a>>,
    traces: &'a [ResolutionTrace],
}

impl ResolveConfig {
    pub fn execute(&self, ctx: &Ctx) -> Result<()> {
        let kb = load_kb(&self.kb)?;
        let report = validate_kb(&kb);
        if !report.is_valid() {
            for violation in &report.violations {
                eprintln!("violation: {violation}");
            }
            bail!("knowledge base {} is invalid", self.kb.display());
        }

        let provider = HashedNgramEmbedder::new(kb.embedding_dim());
        let backend = SynonymListBackend::new(&kb);
        let cascade = CascadeConfig {
            accept_threshold: self.accept_threshold,
            max_synonyms: self.max_synonyms,
            tokenizer: self.tokenizer,
            on_unresolved: self.on_unresolved,
        };

        let text = std::fs::read_to_string(&self.input)
            .with_context(|| format!("cannot read {}", self.input.display()))?;
        let sentences: Vec<&str> = text.lines().collect();
        let resolutions: Vec<SymbolPoseSequence> =
            resolve_sentences(&sentences, &kb, &provider, &backend, &cascade)?;

        let mut out = Vec::new();
        let mut resolved_tokens = 0usize;
        let mut total_tokens = 0usize;
        for (line, resolution) in sentences.iter().zip(&resolutions) {
            resolved_tokens += resolution.items.len();
            total_tokens += resolution.traces.len();
            let record = SentenceOut {
                text: line,
                items: resolution
                    .items
                    .iter()
                    .map(|(symbol, _pose)| ItemOut {
                        symbol,
                        pose_ref: symbol,
                    })
                    .collect(),
                traces: &resolution.traces,
            };
            writeln!(out, "{}", serde_json::to_string(&record)?)?;
        }
        std::fs::write(&self.output, out)
            .with_context(|| format!("cannot write {}", self.output.display()))?;
        ctx.note(format!(
            "resolved {resolved_tokens}/{total_tokens} tokens over {} sentence(s)",
            sentences.len()
        ));
        Ok(())
    }
}
