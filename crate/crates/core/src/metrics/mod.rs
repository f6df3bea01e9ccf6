//! Evaluation metrics: corpus BLEU-1..4, ROUGE-L F1, character error rate,
//! and Fleiss' Kappa, with machine-readable reports.
//!
//! Scores are reported on the 0-100 scale; CER may exceed 100 when the
//! hypothesis is much longer than the reference.

mod bleu;
mod cer;
mod evaluate;
mod kappa;
mod rouge;

pub use bleu::{bleu_n, Smoothing, MAX_BLEU_ORDER};
pub use cer::{cer, cer_corpus, levenshtein};
pub use evaluate::{evaluate_files, evaluate_pairs, CorpusCounts, MetricReport, Tokenizer};
pub use kappa::{fleiss_kappa, RaterMatrix};
pub use rouge::{lcs_length, rouge_l, rouge_l_corpus};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum MetricsError {
    #[error("hypothesis/reference counts differ: {hyps} vs {refs}")]
    LengthMismatch { hyps: usize, refs: usize },
    #[error("empty reference at pair {index}")]
    EmptyReference { index: usize },
    #[error("BLEU order must be 1..=4, got {0}")]
    InvalidOrder(usize),
    #[error("invalid rater matrix: {0}")]
    InvalidMatrix(String),
    #[error("expected agreement is 1, kappa undefined")]
    DegenerateAgreement,
    #[error("line counts differ, first unmatched line {line}")]
    LineCountMismatch { line: usize },
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}
