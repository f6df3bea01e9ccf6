//! Temporal KL distillation losses and the combined training objective,
//! computed over explicitly supplied per-timestep probability distributions.
//!
//! All values are in nats. The reference distribution of every KL term is
//! smoothed by flooring entries at [`SMOOTHING_EPSILON`] and renormalizing,
//! so empirical zeros cannot blow the divergence up to infinity; smoothing
//! is skipped entirely when no entry needs the floor.

mod io;

pub use io::{load_distribution_file, save_distribution_file};

use std::fmt;

use thiserror::Error;

/// Floor applied to reference-distribution entries before a KL term.
pub const SMOOTHING_EPSILON: f64 = 1e-10;

/// Tolerance on probability-vector sums at validation time.
pub const SUM_TOLERANCE: f64 = 1e-6;

/// Which term of the total objective an error belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LossTerm {
    SelfKl,
    LmVideoKl,
    LmTKl,
    Ce,
}

impl fmt::Display for LossTerm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self {
            Self::SelfKl => "self_kl",
            Self::LmVideoKl => "lm_video_kl",
            Self::LmTKl => "lm_t_kl",
            Self::Ce => "ce",
        };
        f.write_str(name)
    }
}

#[derive(Debug, Error)]
pub enum DistillError {
    #[error("probability vectors have different dimensions: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },
    #[error("sequences have different lengths: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },
    #[error("invalid distribution: {0}")]
    InvalidDistribution(String),
    #[error("class index {index} out of range for {classes} classes at step {step}")]
    IndexOutOfRange {
        index: usize,
        classes: usize,
        step: usize,
    },
    #[error("in term {term}: {source}")]
    InTerm {
        term: LossTerm,
        #[source]
        source: Box<DistillError>,
    },
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    #[error("malformed distribution file at line {line}: {message}")]
    MalformedFile { line: usize, message: String },
}

fn validate_vector(p: &[f64]) -> Result<(), DistillError> {
    if p.is_empty() {
        return Err(DistillError::InvalidDistribution(
            "empty probability vector".to_string(),
        ));
    }
    if p.iter().any(|&v| !v.is_finite() || v < 0.0) {
        return Err(DistillError::InvalidDistribution(
            "entries must be finite and non-negative".to_string(),
        ));
    }
    let sum: f64 = p.iter().sum();
    if (sum - 1.0).abs() > SUM_TOLERANCE {
        return Err(DistillError::InvalidDistribution(format!(
            "entries sum to {sum}, expected 1 within {SUM_TOLERANCE}"
        )));
    }
    Ok(())
}

/// A sequence of probability vectors, one per timestep, all of dimension K.
#[derive(Debug, Clone, PartialEq)]
pub struct DistributionSequence {
    steps: Vec<Vec<f64>>,
}

impl DistributionSequence {
    pub fn new(steps: Vec<Vec<f64>>) -> Result<Self, DistillError> {
        if steps.is_empty() {
            return Err(DistillError::InvalidDistribution(
                "a distribution sequence needs at least one timestep".to_string(),
            ));
        }
        let k = steps[0].len();
        for step in &steps {
            if step.len() != k {
                return Err(DistillError::DimensionMismatch {
                    left: k,
                    right: step.len(),
                });
            }
            validate_vector(step)?;
        }
        Ok(Self { steps })
    }

    pub fn steps(&self) -> &[Vec<f64>] {
        &self.steps
    }

    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    pub fn dimension(&self) -> usize {
        self.steps[0].len()
    }
}

/// Floors `q` at [`SMOOTHING_EPSILON`] and renormalizes. Returns `None`
/// when nothing was floored so callers can keep the original bits.
fn smooth(q: &[f64]) -> Option<Vec<f64>> {
    if q.iter().all(|&v| v >= SMOOTHING_EPSILON) {
        return None;
    }
    let floored: Vec<f64> = q.iter().map(|&v| v.max(SMOOTHING_EPSILON)).collect();
    let sum: f64 = floored.iter().sum();
    Some(floored.iter().map(|&v| v / sum).collect())
}

/// KL(p || q) in nats with `0 * ln(0/.) := 0` and `q` smoothed per
/// [`SMOOTHING_EPSILON`].
///
/// Non-negative by Gibbs' inequality and exactly zero when `p == q` and no
/// smoothing was needed. Not symmetric: argument order follows the
/// convention that `p` is the distribution being matched against
/// reference `q`.
pub fn kl_divergence(p: &[f64], q: &[f64]) -> Result<f64, DistillError> {
    if p.len() != q.len() {
        return Err(DistillError::DimensionMismatch {
            left: p.len(),
            right: q.len(),
        });
    }
    validate_vector(p)?;
    validate_vector(q)?;
    let smoothed = smooth(q);
    let q_ref: &[f64] = smoothed.as_deref().unwrap_or(q);
    let mut sum = 0.0;
    for (&pk, &qk) in p.iter().zip(q_ref) {
        if pk > 0.0 {
            sum += pk * (pk / qk).ln();
        }
    }
    Ok(sum)
}

/// Mean per-timestep KL divergence between two sequences.
pub fn temporal_kl(
    p: &DistributionSequence,
    q: &DistributionSequence,
) -> Result<f64, DistillError> {
    if p.len() != q.len() {
        return Err(DistillError::LengthMismatch {
            left: p.len(),
            right: q.len(),
        });
    }
    let mut total = 0.0;
    for (ps, qs) in p.steps().iter().zip(q.steps()) {
        total += kl_divergence(ps, qs)?;
    }
    Ok(total / p.len() as f64)
}

/// Mean token-level negative log-likelihood of the target classes, with
/// probabilities floored at [`SMOOTHING_EPSILON`].
pub fn cross_entropy(
    predicted: &DistributionSequence,
    targets: &[usize],
) -> Result<f64, DistillError> {
    if predicted.len() != targets.len() {
        return Err(DistillError::LengthMismatch {
            left: predicted.len(),
            right: targets.len(),
        });
    }
    let mut total = 0.0;
    for (step, (probs, &target)) in predicted.steps().iter().zip(targets).enumerate() {
        if target >= probs.len() {
            return Err(DistillError::IndexOutOfRange {
                index: target,
                classes: probs.len(),
                step,
            });
        }
        total -= probs[target].max(SMOOTHING_EPSILON).ln();
    }
    Ok(total / targets.len() as f64)
}

/// Per-term weights on the total objective. Defaults to the unweighted sum;
/// setting a weight to zero drops that term.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct LossWeights {
    pub self_kl: f64,
    pub lm_video_kl: f64,
    pub lm_t_kl: f64,
    pub ce: f64,
}

impl Default for LossWeights {
    fn default() -> Self {
        Self {
            self_kl: 1.0,
            lm_video_kl: 1.0,
            lm_t_kl: 1.0,
            ce: 1.0,
        }
    }
}

/// The reported components of the total objective, post-weighting, so
/// `total` is always their exact sum.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct LossBreakdown {
    pub self_kl: f64,
    pub lm_video_kl: f64,
    pub lm_t_kl: f64,
    pub ce: f64,
    pub total: f64,
}

impl LossBreakdown {
    /// Assembles a breakdown from already-weighted components.
    pub fn from_components(self_kl: f64, lm_video_kl: f64, lm_t_kl: f64, ce: f64) -> Self {
        Self {
            self_kl,
            lm_video_kl,
            lm_t_kl,
            ce,
            total: self_kl + lm_video_kl + lm_t_kl + ce,
        }
    }
}

/// Distribution sequences feeding [`total_loss`].
///
/// `lt_pre`/`vt_pre` are the landmark- and video-branch distributions
/// before fusion; their temporal KL realizes the video-branch distillation
/// term (the counterpart of the post-fusion landmark/video term).
#[derive(Debug, Clone, Copy)]
pub struct TotalLossInputs<'a> {
    pub p3d: &'a DistributionSequence,
    pub p_transformer: &'a DistributionSequence,
    pub lt_pre: &'a DistributionSequence,
    pub vt_pre: &'a DistributionSequence,
    pub lt: &'a DistributionSequence,
    pub vt: &'a DistributionSequence,
    pub predicted: &'a DistributionSequence,
    pub targets: &'a [usize],
}

fn in_term(term: LossTerm) -> impl Fn(DistillError) -> DistillError {
    move |source| DistillError::InTerm {
        term,
        source: Box::new(source),
    }
}

/// Combines the three temporal distillation losses and the cross-entropy
/// term into one breakdown; errors name the offending term.
pub fn total_loss(
    inputs: &TotalLossInputs,
    weights: &LossWeights,
) -> Result<LossBreakdown, DistillError> {
    let self_kl = temporal_kl(inputs.p3d, inputs.p_transformer).map_err(in_term(LossTerm::SelfKl))?;
    let lm_video_kl =
        temporal_kl(inputs.lt_pre, inputs.vt_pre).map_err(in_term(LossTerm::LmVideoKl))?;
    let lm_t_kl = temporal_kl(inputs.lt, inputs.vt).map_err(in_term(LossTerm::LmTKl))?;
    let ce = cross_entropy(inputs.predicted, inputs.targets).map_err(in_term(LossTerm::Ce))?;
    Ok(LossBreakdown::from_components(
        weights.self_kl * self_kl,
        weights.lm_video_kl * lm_video_kl,
        weights.lm_t_kl * lm_t_kl,
        weights.ce * ce,
    ))
}
