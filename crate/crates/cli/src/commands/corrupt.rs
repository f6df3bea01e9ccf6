//! `signpipe corrupt`: corrupted/clean pair synthesis.

use std::io::Write;
use std::path::PathBuf;

use anyhow::{Context, Result};
use serde::{Deserialize, Serialize};

use signpipe_core::corrupt::{generate_corpus, CorruptConfig};

use super::Ctx;

/// How input lines become token lists.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CorruptTokenizer {
    /// Lines are pre-tokenized, tokens space-separated.
    Space,
    /// One token per non-whitespace character.
    Char,
}

impl CorruptTokenizer {
    fn tokenize(&self, line: &str) -> Vec<String> {
        match self {
            Self::Space => line.split_whitespace().map(String::from).collect(),
            Self::Char => line
                .chars()
                .filter(|c| !c.is_whitespace())
                .map(String::from)
                .collect(),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CorruptCommandConfig {
    pub input: PathBuf,
    pub output: PathBuf,
    pub p_shuffle: f64,
    pub p_delete: f64,
    pub p_substitute: f64,
    pub p_insert: f64,
    pub shuffle_window: usize,
    pub reps: usize,
    /// Substitution/insertion pool file (one token per line); when absent
    /// the pool is the sorted set of input tokens.
    pub vocab: Option<PathBuf>,
    pub tokenizer: CorruptTokenizer,
    pub allow_empty: bool,
    pub seed: u64,
    pub manifest: Option<PathBuf>,
}

impl CorruptCommandConfig {
    pub fn input_paths(&self) -> Vec<PathBuf> {
        let mut paths = vec![self.input.clone()];
        if let Some(vocab) = &self.vocab {
            paths.push(vocab.clone());
        }
        paths
    }

    pub fn execute(&self, ctx: &Ctx) -> Result<()> {
        let lines = super::read_nonempty_lines(&self.input)?;
        let sentences: Vec<Vec<String>> =
            lines.iter().map(|l| self.tokenizer.tokenize(l)).collect();

        let vocab: Vec<String> = match &self.vocab {
            Some(path) => super::read_nonempty_lines(path)?,
            None => {
                let mut tokens: Vec<String> =
                    sentences.iter().flatten().cloned().collect();
                tokens.sort_unstable();
                tokens.dedup();
                tokens
            }
        };

        let config = CorruptConfig {
            p_shuffle: self.p_shuffle,
            p_delete: self.p_delete,
            p_substitute: self.p_substitute,
            p_insert: self.p_insert,
            shuffle_window: self.shuffle_window,
            vocab,
            seed: self.seed,
            allow_empty: self.allow_empty,
        };

        let mut out = Vec::new();
        let mut records = 0usize;
        for record in generate_corpus(sentences, &config, self.reps) {
            let record = record?;
            writeln!(out, "{}", serde_json::to_string(&record)?)?;
            records += 1;
        }
        std::fs::write(&self.output, out)
            .with_context(|| format!("cannot write {}", self.output.display()))?;
        ctx.note(format!(
            "wrote {records} corruption record(s) to {}",
            self.output.display()
        ));
        Ok(())
    }
}
