//! Knowledge-base validation: violations are data, not failures.

use std::collections::HashSet;
use std::fmt;

use super::KnowledgeBase;

/// One invariant violation found in a knowledge base.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Violation {
    DuplicateSymbol { symbol: String },
    EmptySymbol { entry_index: usize },
    EmbeddingDimMismatch { symbol: String, expected: usize, found: usize },
    ZeroNormEmbedding { symbol: String },
    EmptyPose { symbol: String },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::DuplicateSymbol { symbol } => write!(f, "duplicate symbol {symbol:?}"),
            Self::EmptySymbol { entry_index } => {
                write!(f, "entry {entry_index} has an empty symbol")
            }
            Self::EmbeddingDimMismatch { symbol, expected, found } => write!(
                f,
                "{symbol:?}: embedding has {found} dimensions, knowledge base declares {expected}"
            ),
            Self::ZeroNormEmbedding { symbol } => {
                write!(f, "{symbol:?}: embedding has zero norm")
            }
            Self::EmptyPose { symbol } => write!(f, "{symbol:?}: pose has no frames"),
        }
    }
}

/// Outcome of [`validate_kb`]; an empty violation list means the KB is valid.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Checks every knowledge-base invariant and reports all violations:
/// duplicate or empty symbols, embedding-dimension mismatches, zero-norm
/// embeddings, and empty pose sequences.
pub fn validate_kb(kb: &KnowledgeBase) -> ValidationReport {
    let mut violations = Vec::new();
    let mut seen = HashSet::new();
    let mut reported_dup = HashSet::new();

    for (i, entry) in kb.entries().iter().enumerate() {
        if entry.symbol.is_empty() {
            violations.push(Violation::EmptySymbol { entry_index: i });
        }
        if !seen.insert(entry.symbol.as_str()) && reported_dup.insert(entry.symbol.as_str()) {
            violations.push(Violation::DuplicateSymbol {
                symbol: entry.symbol.clone(),
            });
        }
        if let Some(embedding) = &entry.embedding {
            if embedding.len() != kb.embedding_dim() {
                violations.push(Violation::EmbeddingDimMismatch {
                    symbol: entry.symbol.clone(),
                    expected: kb.embedding_dim(),
                    found: embedding.len(),
                });
            }
            if embedding.iter().all(|&v| v == 0.0) {
                violations.push(Violation::ZeroNormEmbedding {
                    symbol: entry.symbol.clone(),
                });
            }
        }
        if entry.pose.frames().is_empty() {
            violations.push(Violation::EmptyPose {
                symbol: entry.symbol.clone(),
            });
        }
    }

    ValidationReport { violations }
}
