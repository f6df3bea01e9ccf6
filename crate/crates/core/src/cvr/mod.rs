//! Cascading Vocabulary Resolution: direct lookup, embedding-based semantic
//! retrieval, and synonym optimization over a gloss knowledge base, with an
//! audit trace for every token.

mod providers;
mod resolve;
mod search;
mod tokenize;

pub use providers::{HashedNgramEmbedder, Serialized, StaticEmbedder, SynonymListBackend};
pub use resolve::{
    resolve_sentence, resolve_sentences, resolve_token, CascadeConfig, TokenizerKind,
    UnresolvedPolicy,
};
pub use search::{cosine_similarity, embedding_search, embedding_search_vector};
pub use tokenize::{tokenize, TokenizeMode};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::kb::PoseSequence;

#[derive(Debug, Error)]
pub enum CvrError {
    #[error("vector dimensions differ: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },
    #[error("zero-norm vector")]
    ZeroNormVector,
    #[error("knowledge base is empty")]
    EmptyKnowledgeBase,
    #[error("entry {symbol:?} has no embedding")]
    MissingEmbeddings { symbol: String },
    #[error("backend failed on token {token:?}: {message}")]
    Backend { token: String, message: String },
    #[error("token {token:?} could not be resolved")]
    UnresolvedToken { token: String },
}

/// Failure reported by an embedding provider or synonym backend.
#[derive(Debug, Error)]
#[error("{0}")]
pub struct BackendFailure(pub String);

/// Maps text to a fixed-dimension embedding vector.
///
/// Implementations must be deterministic per input and always return finite
/// values of the same dimension. `is_reentrant` tells batch drivers whether
/// concurrent calls are allowed; non-reentrant implementations are wrapped
/// in [`Serialized`] before fan-out.
pub trait EmbeddingProvider: Send + Sync {
    fn embed(&self, text: &str) -> Result<Vec<f64>, BackendFailure>;

    fn is_reentrant(&self) -> bool {
        true
    }
}

/// Proposes ranked candidate replacements for an out-of-vocabulary token.
pub trait SynonymBackend: Send + Sync {
    fn propose(
        &self,
        token: &str,
        context: &[String],
        max: usize,
    ) -> Result<Vec<String>, BackendFailure>;

    fn is_reentrant(&self) -> bool {
        true
    }
}

/// Cascade level that produced (or failed to produce) a match.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ResolutionLevel {
    Direct,
    Embedding,
    Synonym,
    Unresolved,
}

/// Audited outcome of resolving one token.
///
/// `score` is the cosine similarity of the accepted embedding match; for
/// unresolved tokens it carries the best rejected score. `candidates_examined`
/// counts similarity comparisons plus synonym proposals inspected (a direct
/// hit examines none).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResolutionTrace {
    pub token: String,
    pub level: ResolutionLevel,
    pub chosen_symbol: Option<String>,
    pub score: Option<f64>,
    pub candidates_examined: usize,
}

/// Ordered symbol/pose pairs for the resolved tokens of one sentence, with
/// one trace per input token (unresolved tokens appear in `traces` only).
#[derive(Debug, Clone, PartialEq)]
pub struct SymbolPoseSequence {
    pub items: Vec<(String, PoseSequence)>,
    pub traces: Vec<ResolutionTrace>,
}
