//! `signpipe eval`: the full metric stack over line-aligned files.

use std::path::PathBuf;

use anyhow::{Context, Result};
use serde::{Deserialize, Serialize};

use signpipe_core::metrics::{evaluate_files, MetricReport, Smoothing, Tokenizer};

use super::Ctx;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EvalCommandConfig {
    pub hyp: PathBuf,
    pub reference: PathBuf,
    pub tokenizer: Tokenizer,
    pub smoothing: Smoothing,
    /// JSON report destination (the global `--json PATH`).
    pub json_out: Option<PathBuf>,
    pub manifest: Option<PathBuf>,
}

fn human_summary(report: &MetricReport) -> String {
    format!(
        "BLEU-1 {:.2}  BLEU-2 {:.2}  BLEU-3 {:.2}  BLEU-4 {:.2}  ROUGE-L {:.2}  CER {:.2}%  ({} pairs)",
        report.bleu[&1],
        report.bleu[&2],
        report.bleu[&3],
        report.bleu[&4],
        report.rouge_l,
        report.cer,
        report.counts.sentence_pairs
    )
}

impl EvalCommandConfig {
    pub fn execute(&self, ctx: &Ctx) -> Result<()> {
        let report = evaluate_files(&self.hyp, &self.reference, self.tokenizer, self.smoothing)?;
        let json = serde_json::to_string(&report)?;
        if let Some(path) = &self.json_out {
            std::fs::write(path, json.clone() + "\n")
                .with_context(|| format!("cannot write {}", path.display()))?;
            ctx.note(format!("report written to {}", path.display()));
        }
        if ctx.json_stdout() {
            println!("{json}");
        } else {
            println!("{}", human_summary(&report));
        }
        Ok(())
    }
}
