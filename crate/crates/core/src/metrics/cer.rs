//! Character error rate via Levenshtein distance.

use super::MetricsError;

/// Unit-cost edit distance between two sequences.
pub fn levenshtein<T: PartialEq>(a: &[T], b: &[T]) -> usize {
    if a.is_empty() {
        return b.len();
    }
    if b.is_empty() {
        return a.len();
    }
    let mut prev: Vec<usize> = (0..=b.len()).collect();
    let mut curr = vec![0usize; b.len() + 1];
    for (i, x) in a.iter().enumerate() {
        curr[0] = i + 1;
        for (j, y) in b.iter().enumerate() {
            let substitution = prev[j] + usize::from(x != y);
            curr[j + 1] = substitution.min(prev[j + 1] + 1).min(curr[j] + 1);
        }
        std::mem::swap(&mut prev, &mut curr);
    }
    prev[b.len()]
}

/// Sentence-level CER: character edit distance over reference length, as a
/// percentage. Exceeds 100 when the hypothesis is much longer than the
/// reference.
pub fn cer(hypothesis: &str, reference: &str) -> Result<f64, MetricsError> {
    let ref_chars: Vec<char> = reference.chars().collect();
    if ref_chars.is_empty() {
        return Err(MetricsError::EmptyReference { index: 0 });
    }
    let hyp_chars: Vec<char> = hypothesis.chars().collect();
    let edits = levenshtein(&hyp_chars, &ref_chars);
    Ok(100.0 * edits as f64 / ref_chars.len() as f64)
}

/// Corpus-level CER: total edits over total reference characters.
pub fn cer_corpus(hypotheses: &[String], references: &[String]) -> Result<f64, MetricsError> {
    let (edits, ref_chars) = cer_corpus_counts(hypotheses, references)?;
    Ok(100.0 * edits as f64 / ref_chars as f64)
}

pub(crate) fn cer_corpus_counts(
    hypotheses: &[String],
    references: &[String],
) -> Result<(u64, u64), MetricsError> {
    if hypotheses.len() != references.len() {
        return Err(MetricsError::LengthMismatch {
            hyps: hypotheses.len(),
            refs: references.len(),
        });
    }
    let mut total_edits = 0u64;
    let mut total_ref_chars = 0u64;
    for (index, (hyp, reference)) in hypotheses.iter().zip(references).enumerate() {
        let ref_chars: Vec<char> = reference.chars().collect();
        if ref_chars.is_empty() {
            return Err(MetricsError::EmptyReference { index });
        }
        let hyp_chars: Vec<char> = hyp.chars().collect();
        total_edits += levenshtein(&hyp_chars, &ref_chars) as u64;
        total_ref_chars += ref_chars.len() as u64;
    }
    Ok((total_edits, total_ref_chars))
}
