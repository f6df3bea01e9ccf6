//! Fleiss' Kappa for multi-rater agreement.

use super::MetricsError;

/// Items-by-categories rating counts with a constant number of raters per
/// item.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RaterMatrix {
    counts: Vec<Vec<u64>>,
    raters_per_item: u64,
}

impl RaterMatrix {
    /// Validates that there are at least 2 items, every row has the same
    /// category count, and every row sums to the same rater count n >= 2.
    pub fn new(counts: Vec<Vec<u64>>) -> Result<Self, MetricsError> {
        if counts.len() < 2 {
            return Err(MetricsError::InvalidMatrix(format!(
                "need at least 2 items, got {}",
                counts.len()
            )));
        }
        let categories = counts[0].len();
        if categories == 0 {
            return Err(MetricsError::InvalidMatrix(
                "need at least one category".to_string(),
            ));
        }
        if counts.iter().any(|row| row.len() != categories) {
            return Err(MetricsError::InvalidMatrix(
                "rows have different category counts".to_string(),
            ));
        }
        let raters_per_item: u64 = counts[0].iter().sum();
        if raters_per_item < 2 {
            return Err(MetricsError::InvalidMatrix(format!(
                "need at least 2 raters per item, got {raters_per_item}"
            )));
        }
        if counts
            .iter()
            .any(|row| row.iter().sum::<u64>() != raters_per_item)
        {
            return Err(MetricsError::InvalidMatrix(
                "rows sum to different rater counts".to_string(),
            ));
        }
        Ok(Self {
            counts,
            raters_per_item,
        })
    }

    pub fn items(&self) -> usize {
        self.counts.len()
    }

    pub fn categories(&self) -> usize {
        self.counts[0].len()
    }

    pub fn raters_per_item(&self) -> u64 {
        self.raters_per_item
    }

    pub fn counts(&self) -> &[Vec<u64>] {
        &self.counts
    }
}

/// Fleiss' Kappa: `(P_bar - P_e) / (1 - P_e)`.
///
/// Returns exactly 1.0 under universal agreement when categories vary
/// across items; errors with [`MetricsError::DegenerateAgreement`] when the
/// expected agreement is 1 (every rating in one category), where kappa is
/// undefined.
pub fn fleiss_kappa(matrix: &RaterMatrix) -> Result<f64, MetricsError> {
    let n = matrix.raters_per_item() as f64;
    let item_count = matrix.items() as f64;

    // Per-item observed agreement: fraction of agreeing rater pairs.
    let mut p_bar = 0.0;
    for row in matrix.counts() {
        let sum_sq: u64 = row.iter().map(|&c| c * c).sum();
        p_bar += (sum_sq as f64 - n) / (n * (n - 1.0));
    }
    p_bar /= item_count;

    // Expected agreement from category marginals.
    let total_ratings = n * item_count;
    let mut p_expected = 0.0;
    for category in 0..matrix.categories() {
        let column: u64 = matrix.counts().iter().map(|row| row[category]).sum();
        let share = column as f64 / total_ratings;
        p_expected += share * share;
    }

    let denominator = 1.0 - p_expected;
    if denominator == 0.0 {
        return Err(MetricsError::DegenerateAgreement);
    }
    Ok((p_bar - p_expected) / denominator)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn universal_agreement_with_category_variation_is_exactly_one() {
        // 10 items, 2 raters, everyone agrees, both categories used.
        let mut counts = vec![vec![2, 0]; 5];
        counts.extend(vec![vec![0, 2]; 5]);
        let matrix = RaterMatrix::new(counts).unwrap();
        assert_eq!(fleiss_kappa(&matrix).unwrap(), 1.0);
    }

    #[test]
    fn two_item_hand_computation() {
        // Rows [2,0] and [0,2]: P_bar = 1, P_e = 0.5, kappa = 1.
        let matrix = RaterMatrix::new(vec![vec![2, 0], vec![0, 2]]).unwrap();
        assert_eq!(fleiss_kappa(&matrix).unwrap(), 1.0);
    }

    #[test]
    fn single_category_is_degenerate() {
        let matrix = RaterMatrix::new(vec![vec![3, 0], vec![3, 0]]).unwrap();
        assert!(matches!(
            fleiss_kappa(&matrix),
            Err(MetricsError::DegenerateAgreement)
        ));
    }

    #[test]
    fn textbook_fleiss_example() {
        // Fleiss (1971)-style check: 14 raters, known kappa ~ 0.2099.
        let counts = vec![
            vec![0, 0, 0, 0, 14],
            vec![0, 2, 6, 4, 2],
            vec![0, 0, 3, 5, 6],
            vec![0, 3, 9, 2, 0],
            vec![2, 2, 8, 1, 1],
            vec![7, 7, 0, 0, 0],
            vec![3, 2, 6, 3, 0],
            vec![2, 5, 3, 2, 2],
            vec![6, 5, 2, 1, 0],
            vec![0, 2, 2, 3, 7],
        ];
        let matrix = RaterMatrix::new(counts).unwrap();
        let kappa = fleiss_kappa(&matrix).unwrap();
        assert!((kappa - 0.20993).abs() < 1e-4, "got {kappa}");
    }

    #[test]
    fn disagreement_can_go_negative() {
        let matrix = RaterMatrix::new(vec![vec![1, 1], vec![1, 1]]).unwrap();
        let kappa = fleiss_kappa(&matrix).unwrap();
        assert!(kappa < 0.0);
        assert!(kappa >= -1.0);
    }

    #[test]
    fn matrix_validation() {
        assert!(matches!(
            RaterMatrix::new(vec![vec![2, 0]]),
            Err(MetricsError::InvalidMatrix(_))
        ));
        assert!(matches!(
            RaterMatrix::new(vec![vec![2, 0], vec![1, 0]]),
            Err(MetricsError::InvalidMatrix(_))
        ));
        assert!(matches!(
            RaterMatrix::new(vec![vec![1, 0], vec![0, 1]]),
            Err(MetricsError::InvalidMatrix(_))
        ));
        assert!(matches!(
            RaterMatrix::new(vec![vec![2, 0], vec![0, 2, 0]]),
            Err(MetricsError::InvalidMatrix(_))
        ));
    }
}
