//! Embedding-based semantic retrieval over a knowledge base.

use super::CvrError;
use crate::kb::{GlossEntry, KnowledgeBase};

/// Cosine similarity of two equal-dimension vectors with positive norms.
///
/// Symmetric and invariant to positive rescaling of either argument.
pub fn cosine_similarity(a: &[f64], b: &[f64]) -> Result<f64, CvrError> {
    if a.len() != b.len() {
        return Err(CvrError::DimensionMismatch {
            left: a.len(),
            right: b.len(),
        });
    }
    let mut dot = 0.0;
    let mut norm_a = 0.0;
    let mut norm_b = 0.0;
    for (&x, &y) in a.iter().zip(b) {
        dot += x * y;
        norm_a += x * x;
        norm_b += y * y;
    }
    if norm_a == 0.0 || norm_b == 0.0 {
        return Err(CvrError::ZeroNormVector);
    }
    Ok(dot / (norm_a.sqrt() * norm_b.sqrt()))
}

/// Returns the KB entry whose embedding is most cosine-similar to `query`,
/// with ties broken by lexicographically smallest symbol.
///
/// Every entry must carry an embedding; the scan is exhaustive, so the
/// result always equals a brute-force argmax.
pub fn embedding_search_vector<'kb>(
    query: &[f64],
    kb: &'kb KnowledgeBase,
) -> Result<(&'kb GlossEntry, f64), CvrError> {
    if kb.is_empty() {
        return Err(CvrError::EmptyKnowledgeBase);
    }
    if query.iter().all(|&v| v == 0.0) {
        return Err(CvrError::ZeroNormVector);
    }
    let mut best: Option<(&GlossEntry, f64)> = None;
    for entry in kb.entries() {
        let embedding = entry
            .embedding
            .as_deref()
            .ok_or_else(|| CvrError::MissingEmbeddings {
                symbol: entry.symbol.clone(),
            })?;
        let score = cosine_similarity(query, embedding)?;
        let better = match best {
            None => true,
            Some((cur, cur_score)) => {
                score > cur_score || (score == cur_score && entry.symbol < cur.symbol)
            }
        };
        if better {
            best = Some((entry, score));
        }
    }
    Ok(best.expect("kb is non-empty"))
}

/// Embeds `query` with `provider` and runs [`embedding_search_vector`].
pub fn embedding_search<'kb>(
    query: &str,
    kb: &'kb KnowledgeBase,
    provider: &dyn super::EmbeddingProvider,
) -> Result<(&'kb GlossEntry, f64), CvrError> {
    let embedded = provider.embed(query).map_err(|e| CvrError::Backend {
        token: query.to_string(),
        message: e.to_string(),
    })?;
    embedding_search_vector(&embedded, kb)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cvr::StaticEmbedder;
    use crate::kb::test_support::entry;

    fn kb_with(embeddings: &[(&str, Vec<f64>)]) -> KnowledgeBase {
        let mut kb = KnowledgeBase::new(embeddings[0].1.len());
        for (symbol, e) in embeddings {
            kb.push(entry(symbol, Some(e.clone())));
        }
        kb
    }

    #[test]
    fn identical_direction_scores_one() {
        assert_eq!(cosine_similarity(&[1.0, 0.0], &[1.0, 0.0]).unwrap(), 1.0);
    }

    #[test]
    fn orthogonal_scores_zero() {
        assert_eq!(cosine_similarity(&[1.0, 0.0], &[0.0, 1.0]).unwrap(), 0.0);
    }

    #[test]
    fn hand_computed_eight_ninths() {
        let s = cosine_similarity(&[1.0, 2.0, 2.0], &[2.0, 1.0, 2.0]).unwrap();
        assert!((s - 8.0 / 9.0).abs() < 1e-12, "got {s}");
    }

    #[test]
    fn dimension_and_norm_errors() {
        assert!(matches!(
            cosine_similarity(&[1.0], &[1.0, 2.0]),
            Err(CvrError::DimensionMismatch { left: 1, right: 2 })
        ));
        assert!(matches!(
            cosine_similarity(&[0.0, 0.0], &[1.0, 0.0]),
            Err(CvrError::ZeroNormVector)
        ));
    }

    #[test]
    fn search_picks_nearest_entry() {
        let kb = kb_with(&[("A", vec![1.0, 0.0]), ("B", vec![0.0, 1.0])]);
        let provider = StaticEmbedder::new([("q", vec![0.9, 0.1])]);
        let (hit, score) = embedding_search("q", &kb, &provider).unwrap();
        assert_eq!(hit.symbol, "A");
        assert!((score - 0.9 / 0.82f64.sqrt()).abs() < 1e-12);
        assert!((score - 0.9939).abs() < 1e-4);
    }

    #[test]
    fn exact_match_scores_one() {
        let kb = kb_with(&[("C", vec![0.3, 0.4]), ("D", vec![-1.0, 0.2])]);
        let (hit, score) = embedding_search_vector(&[0.3, 0.4], &kb).unwrap();
        assert_eq!(hit.symbol, "C");
        assert!((score - 1.0).abs() < 1e-12);
    }

    #[test]
    fn ties_break_lexicographically() {
        let kb = kb_with(&[("b", vec![1.0, 0.0]), ("a", vec![1.0, 0.0])]);
        let (hit, _) = embedding_search_vector(&[2.0, 0.0], &kb).unwrap();
        assert_eq!(hit.symbol, "a");
    }

    #[test]
    fn missing_embedding_is_an_error() {
        let mut kb = kb_with(&[("A", vec![1.0, 0.0])]);
        kb.push(entry("B", None));
        assert!(matches!(
            embedding_search_vector(&[1.0, 0.0], &kb),
            Err(CvrError::MissingEmbeddings { symbol }) if symbol == "B"
        ));
    }

    #[test]
    fn zero_norm_query_is_an_error() {
        let kb = kb_with(&[("A", vec![1.0, 0.0])]);
        assert!(matches!(
            embedding_search_vector(&[0.0, 0.0], &kb),
            Err(CvrError::ZeroNormVector)
        ));
    }
}
