//! Corpus-level BLEU with modified n-gram precision and brevity penalty.

use std::collections::HashMap;

use super::MetricsError;

pub const MAX_BLEU_ORDER: usize = 4;

/// Zero-count handling for higher orders.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Smoothing {
    /// Canonical BLEU: any zero precision zeroes the score.
    None,
    /// Add one to numerator and denominator of orders >= 2 whose match
    /// count is zero.
    AddOne,
}

/// Aggregated integer n-gram statistics for a corpus.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub(crate) struct NgramStats {
    pub matches: [u64; MAX_BLEU_ORDER],
    pub totals: [u64; MAX_BLEU_ORDER],
    pub hyp_tokens: u64,
    pub ref_tokens: u64,
}

fn ngram_counts(tokens: &[String], order: usize) -> HashMap<&[String], u64> {
    let mut counts = HashMap::new();
    if tokens.len() >= order {
        for gram in tokens.windows(order) {
            *counts.entry(gram).or_insert(0) += 1;
        }
    }
    counts
}

/// Clipped match and total counts for one sentence pair, orders 1..=4.
pub(crate) fn accumulate_pair(stats: &mut NgramStats, hyp: &[String], reference: &[String]) {
    stats.hyp_tokens += hyp.len() as u64;
    stats.ref_tokens += reference.len() as u64;
    for order in 1..=MAX_BLEU_ORDER {
        let ref_counts = ngram_counts(reference, order);
        for (gram, count) in ngram_counts(hyp, order) {
            let clip = ref_counts.get(gram).copied().unwrap_or(0);
            stats.matches[order - 1] += count.min(clip);
        }
        stats.totals[order - 1] += hyp.len().saturating_sub(order - 1) as u64;
    }
}

pub(crate) fn corpus_stats(
    hypotheses: &[Vec<String>],
    references: &[Vec<String>],
) -> Result<NgramStats, MetricsError> {
    if hypotheses.len() != references.len() {
        return Err(MetricsError::LengthMismatch {
            hyps: hypotheses.len(),
            refs: references.len(),
        });
    }
    let mut stats = NgramStats::default();
    for (index, (hyp, reference)) in hypotheses.iter().zip(references).enumerate() {
        if reference.is_empty() {
            return Err(MetricsError::EmptyReference { index });
        }
        accumulate_pair(&mut stats, hyp, reference);
    }
    Ok(stats)
}

/// BLEU from aggregated counts. Geometric mean of the modified precisions
/// of orders 1..=n, times the brevity penalty `exp(1 - r/c)` when `c <= r`,
/// on the 0-100 scale.
pub(crate) fn bleu_from_stats(stats: &NgramStats, n: usize, smoothing: Smoothing) -> f64 {
    if stats.hyp_tokens == 0 {
        return 0.0;
    }
    let mut log_sum = 0.0;
    for order in 0..n {
        let (mut matches, mut total) = (stats.matches[order], stats.totals[order]);
        if matches == 0 && order > 0 && smoothing == Smoothing::AddOne {
            matches += 1;
            total += 1;
        }
        if matches == 0 || total == 0 {
            return 0.0;
        }
        log_sum += (matches as f64 / total as f64).ln();
    }
    let geo_mean = (log_sum / n as f64).exp();
    let c = stats.hyp_tokens as f64;
    let r = stats.ref_tokens as f64;
    let brevity = if c > r { 1.0 } else { (1.0 - r / c).exp() };
    100.0 * brevity * geo_mean
}

/// Corpus BLEU-n over parallel token lists.
pub fn bleu_n(
    hypotheses: &[Vec<String>],
    references: &[Vec<String>],
    n: usize,
    smoothing: Smoothing,
) -> Result<f64, MetricsError> {
    if n == 0 || n > MAX_BLEU_ORDER {
        return Err(MetricsError::InvalidOrder(n));
    }
    let stats = corpus_stats(hypotheses, references)?;
    Ok(bleu_from_stats(&stats, n, smoothing))
}
