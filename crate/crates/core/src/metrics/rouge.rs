//! ROUGE-L F1 (beta = 1) based on longest common subsequence.

use super::MetricsError;

/// Length of the longest common subsequence of two token lists.
pub fn lcs_length<T: PartialEq>(a: &[T], b: &[T]) -> usize {
    if a.is_empty() || b.is_empty() {
        return 0;
    }
    let mut prev = vec![0usize; b.len() + 1];
    let mut curr = vec![0usize; b.len() + 1];
    for x in a {
        for (j, y) in b.iter().enumerate() {
            curr[j + 1] = if x == y {
                prev[j] + 1
            } else {
                prev[j + 1].max(curr[j])
            };
        }
        std::mem::swap(&mut prev, &mut curr);
    }
    prev[b.len()]
}

/// Sentence-level ROUGE-L F1 on the 0-100 scale:
/// `P = LCS/|hyp|`, `R = LCS/|ref|`, `F = 2PR/(P+R)` (0 when both are 0).
pub fn rouge_l(hypothesis: &[String], reference: &[String]) -> Result<f64, MetricsError> {
    if reference.is_empty() {
        return Err(MetricsError::EmptyReference { index: 0 });
    }
    Ok(rouge_l_pair(hypothesis, reference))
}

pub(crate) fn rouge_l_pair(hypothesis: &[String], reference: &[String]) -> f64 {
    if hypothesis.is_empty() {
        return 0.0;
    }
    let lcs = lcs_length(hypothesis, reference) as f64;
    if lcs == 0.0 {
        return 0.0;
    }
    let precision = lcs / hypothesis.len() as f64;
    let recall = lcs / reference.len() as f64;
    100.0 * 2.0 * precision * recall / (precision + recall)
}

/// Corpus score: mean of the per-pair F1 values.
pub fn rouge_l_corpus(
    hypotheses: &[Vec<String>],
    references: &[Vec<String>],
) -> Result<f64, MetricsError> {
    if hypotheses.len() != references.len() {
        return Err(MetricsError::LengthMismatch {
            hyps: hypotheses.len(),
            refs: references.len(),
        });
    }
    if hypotheses.is_empty() {
        return Ok(0.0);
    }
    let mut sum = 0.0;
    for (index, (hyp, reference)) in hypotheses.iter().zip(references).enumerate() {
        if reference.is_empty() {
            return Err(MetricsError::EmptyReference { index });
        }
        sum += rouge_l_pair(hyp, reference);
    }
    Ok(sum / hypotheses.len() as f64)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toks(s: &str) -> Vec<String> {
        s.split_whitespace().map(String::from).collect()
    }

    #[test]
    fn identical_sequences_score_exactly_100() {
        let t = toks("a b c");
        assert_eq!(rouge_l(&t, &t).unwrap(), 100.0);
    }

    #[test]
    fn hand_computed_f1() {
        // LCS("a b c", "a c") = 2; P = 2/3, R = 1, F = 0.8.
        let score = rouge_l(&toks("a b c"), &toks("a c")).unwrap();
        assert!((score - 80.0).abs() < 1e-9, "got {score}");
    }

    #[test]
    fn disjoint_vocabularies_score_zero() {
        assert_eq!(rouge_l(&toks("x y"), &toks("a b")).unwrap(), 0.0);
        assert_eq!(rouge_l(&[], &toks("a b")).unwrap(), 0.0);
    }

    #[test]
    fn lcs_values() {
        assert_eq!(lcs_length(&toks("a b c d"), &toks("b d")), 2);
        assert_eq!(lcs_length(&toks("a b"), &toks("b a")), 1);
        assert_eq!(lcs_length::<String>(&[], &toks("a")), 0);
    }

    #[test]
    fn corpus_is_the_mean() {
        let hyps = vec![toks("a b c"), toks("a b c")];
        let refs = vec![toks("a b c"), toks("a c")];
        let score = rouge_l_corpus(&hyps, &refs).unwrap();
        assert!((score - 90.0).abs() < 1e-9);
    }

    #[test]
    fn empty_reference_is_an_error() {
        assert!(matches!(
            rouge_l(&toks("a"), &[]),
            Err(MetricsError::EmptyReference { .. })
        ));
        assert!(matches!(
            rouge_l_corpus(&[toks("a")], &[Vec::new()]),
            Err(MetricsError::EmptyReference { index: 0 })
        ));
    }
}
