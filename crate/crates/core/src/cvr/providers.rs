//! Shipped provider/backend implementations.
//!
//! The toolkit stays fully offline: [`HashedNgramEmbedder`] gives a
//! deterministic text embedding and [`SynonymListBackend`] proposes
//! candidates straight from the KB's declared synonyms. Remote models plug
//! in behind the same traits.

use std::collections::HashMap;
use std::sync::Mutex;

use super::{BackendFailure, EmbeddingProvider, SynonymBackend};
use crate::kb::KnowledgeBase;

/// Deterministic character n-gram hashing embedder.
///
/// Each 1..=3-gram of the input is FNV-hashed into one of `dim` buckets;
/// the resulting count vector is L2-normalized. Similar surface forms share
/// n-grams and therefore score high under cosine similarity, which is all
/// the offline pipeline needs.
#[derive(Debug, Clone)]
pub struct HashedNgramEmbedder {
    dim: usize,
}

impl HashedNgramEmbedder {
    pub fn new(dim: usize) -> Self {
        assert!(dim > 0, "embedding dimension must be positive");
        Self { dim }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }
}

fn fnv1a(bytes: &[u8]) -> u64 {
    let mut hash: u64 = 0xCBF2_9CE4_8422_2325;
    for &b in bytes {
        hash ^= u64::from(b);
        hash = hash.wrapping_mul(0x0000_0100_0000_01B3);
    }
    hash
}

impl EmbeddingProvider for HashedNgramEmbedder {
    fn embed(&self, text: &str) -> Result<Vec<f64>, BackendFailure> {
        if text.is_empty() {
            return Err(BackendFailure("cannot embed empty text".to_string()));
        }
        let chars: Vec<char> = text.chars().collect();
        let mut counts = vec![0.0f64; self.dim];
        for n in 1..=3.min(chars.len()) {
            for gram in chars.windows(n) {
                let key: String = gram.iter().collect();
                let bucket = (fnv1a(key.as_bytes()) % self.dim as u64) as usize;
                counts[bucket] += 1.0;
            }
        }
        let norm = counts.iter().map(|v| v * v).sum::<f64>().sqrt();
        for v in &mut counts {
            *v /= norm;
        }
        Ok(counts)
    }
}

/// Fixed text-to-vector map for tests and replayed runs.
#[derive(Debug, Clone, Default)]
pub struct StaticEmbedder {
    map: HashMap<String, Vec<f64>>,
}

impl StaticEmbedder {
    pub fn new<I, S>(entries: I) -> Self
    where
        I: IntoIterator<Item = (S, Vec<f64>)>,
        S: Into<String>,
    {
        Self {
            map: entries
                .into_iter()
                .map(|(k, v)| (k.into(), v))
                .collect(),
        }
    }
}

impl EmbeddingProvider for StaticEmbedder {
    fn embed(&self, text: &str) -> Result<Vec<f64>, BackendFailure> {
        self.map
            .get(text)
            .cloned()
            .ok_or_else(|| BackendFailure(format!("no embedding for {text:?}")))
    }
}

/// Offline synonym backend reading `GlossEntry::synonyms`.
///
/// Proposes every symbol that declares the token as a synonym, in
/// lexicographic symbol order, so the full cascade is testable without any
/// external model.
pub struct SynonymListBackend<'kb> {
    kb: &'kb KnowledgeBase,
}

impl<'kb> SynonymListBackend<'kb> {
    pub fn new(kb: &'kb KnowledgeBase) -> Self {
        Self { kb }
    }
}

impl SynonymBackend for SynonymListBackend<'_> {
    fn propose(
        &self,
        token: &str,
        _context: &[String],
        max: usize,
    ) -> Result<Vec<String>, BackendFailure> {
        let mut candidates: Vec<String> = self
            .kb
            .entries()
            .iter()
            .filter(|e| e.synonyms.iter().any(|s| s == token))
            .map(|e| e.symbol.clone())
            .collect();
        candidates.sort_unstable();
        candidates.dedup();
        candidates.truncate(max);
        Ok(candidates)
    }
}

/// Mutex wrapper that makes a non-reentrant provider or backend safe to
/// share across batch workers.
pub struct Serialized<T> {
    inner: Mutex<T>,
}

impl<T> Serialized<T> {
    pub fn new(inner: T) -> Self {
        Self {
            inner: Mutex::new(inner),
        }
    }
}

impl<T: EmbeddingProvider> EmbeddingProvider for Serialized<T> {
    fn embed(&self, text: &str) -> Result<Vec<f64>, BackendFailure> {
        self.inner.lock().expect("provider lock").embed(text)
    }
}

impl<T: SynonymBackend> SynonymBackend for Serialized<T> {
    fn propose(
        &self,
        token: &str,
        context: &[String],
        max: usize,
    ) -> Result<Vec<String>, BackendFailure> {
        self.inner
            .lock()
            .expect("backend lock")
            .propose(token, context, max)
    }
}
