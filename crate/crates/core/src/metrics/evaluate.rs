//! One-pass evaluation of line-aligned hypothesis/reference files.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::bleu::{bleu_from_stats, corpus_stats, Smoothing, MAX_BLEU_ORDER};
use super::cer::cer_corpus_counts;
use super::rouge::rouge_l_corpus;
use super::MetricsError;

/// Line tokenizer for BLEU/ROUGE. CER is character-level by definition and
/// ignores this choice. `Char` is the default for Chinese text.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Tokenizer {
    Char,
    Whitespace,
}

impl Tokenizer {
    pub fn tokenize(&self, line: &str) -> Vec<String> {
        match self {
            Self::Char => line
                .chars()
                .filter(|c| !c.is_whitespace())
                .map(String::from)
                .collect(),
            Self::Whitespace => line.split_whitespace().map(String::from).collect(),
        }
    }
}

/// Exact corpus statistics backing the floating-point scores.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CorpusCounts {
    pub sentence_pairs: usize,
    pub hyp_tokens: u64,
    pub ref_tokens: u64,
    pub hyp_chars: u64,
    pub ref_chars: u64,
    pub char_edits: u64,
    pub ngram_matches: [u64; MAX_BLEU_ORDER],
    pub ngram_totals: [u64; MAX_BLEU_ORDER],
}

/// The full metric stack for one corpus.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricReport {
    /// BLEU-1..4 on the 0-100 scale, keyed by order.
    pub bleu: BTreeMap<u8, f64>,
    pub rouge_l: f64,
    pub cer: f64,
    pub counts: CorpusCounts,
}

/// Computes BLEU-1..4, ROUGE-L, and CER over parallel line lists.
pub fn evaluate_pairs(
    hyp_lines: &[String],
    ref_lines: &[String],
    tokenizer: Tokenizer,
    smoothing: Smoothing,
) -> Result<MetricReport, MetricsError> {
    if hyp_lines.len() != ref_lines.len() {
        return Err(MetricsError::LineCountMismatch {
            line: hyp_lines.len().min(ref_lines.len()) + 1,
        });
    }
    let hyp_tokens: Vec<Vec<String>> = hyp_lines.iter().map(|l| tokenizer.tokenize(l)).collect();
    let ref_tokens: Vec<Vec<String>> = ref_lines.iter().map(|l| tokenizer.tokenize(l)).collect();

    let stats = corpus_stats(&hyp_tokens, &ref_tokens)?;
    let mut bleu = BTreeMap::new();
    for n in 1..=MAX_BLEU_ORDER {
        bleu.insert(n as u8, bleu_from_stats(&stats, n, smoothing));
    }
    let rouge_l = rouge_l_corpus(&hyp_tokens, &ref_tokens)?;
    let (char_edits, ref_chars) = cer_corpus_counts(hyp_lines, ref_lines)?;

    Ok(MetricReport {
        bleu,
        rouge_l,
        cer: 100.0 * char_edits as f64 / ref_chars as f64,
        counts: CorpusCounts {
            sentence_pairs: hyp_lines.len(),
            hyp_tokens: stats.hyp_tokens,
            ref_tokens: stats.ref_tokens,
            hyp_chars: hyp_lines.iter().map(|l| l.chars().count() as u64).sum(),
            ref_chars,
            char_edits,
            ngram_matches: stats.matches,
            ngram_totals: stats.totals,
        },
    })
}

fn read_lines(path: &Path) -> Result<Vec<String>, MetricsError> {
    let content = std::fs::read_to_string(path)?;
    Ok(content.lines().map(String::from).collect())
}

/// Reads two line-aligned files and evaluates them.
pub fn evaluate_files(
    hyp_path: impl AsRef<Path>,
    ref_path: impl AsRef<Path>,
    tokenizer: Tokenizer,
    smoothing: Smoothing,
) -> Result<MetricReport, MetricsError> {
    let hyp_lines = read_lines(hyp_path.as_ref())?;
    let ref_lines = read_lines(ref_path.as_ref())?;
    evaluate_pairs(&hyp_lines, &ref_lines, tokenizer, smoothing)
}
