//! Weighted perturbation of a clip: the large-op branch acts inside each
//! fast-motion mask, the small-op branch inside its complement, and the
//! output is the weighted sum of the two branches.

use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::ops::{
    block_occlude, local_gaussian_noise, pixel_shuffle, random_pixel_replace, temporal_shuffle,
    PixelRegion,
};
use super::{FrameGrid, MotionMask, PerturbConfig, PerturbError, PerturbOp, ReconPair, VideoClip};
use crate::seed::derived_rng;

const STREAM_LARGE: u64 = 1;
const STREAM_SMALL: u64 = 2;
const STREAM_TEMPORAL: u64 = 3;

fn run_spatial_ops(
    frame: &FrameGrid,
    ops: &[PerturbOp],
    region: &PixelRegion,
    seed: u64,
    frame_index: usize,
    stream: u64,
) -> FrameGrid {
    let mut current = frame.clone();
    for (op_index, op) in ops.iter().enumerate() {
        // One independent RNG per (frame, branch, op): parallel frame
        // processing is bit-identical to serial.
        let mut rng: ChaCha8Rng =
            derived_rng(seed, &[stream, frame_index as u64, op_index as u64]);
        current = match op {
            PerturbOp::PixelShuffle => pixel_shuffle(&current, region, &mut rng),
            PerturbOp::RandomPixelReplace { p } => {
                random_pixel_replace(&current, region, *p, &mut rng)
            }
            PerturbOp::BlockOcclude { block_h, block_w } => {
                block_occlude(&current, region, *block_h, *block_w, &mut rng)
            }
            PerturbOp::LocalGaussianNoise { sigma } => {
                local_gaussian_noise(&current, region, *sigma, &mut rng)
            }
            // Temporal shuffling is a whole-clip op, applied after the
            // spatial passes.
            PerturbOp::TemporalShuffle => current,
        };
    }
    current
}

fn weighted_sum(large: &FrameGrid, small: &FrameGrid, w_large: f64, w_small: f64) -> FrameGrid {
    let mut out = large.clone();
    for (o, (&l, &s)) in out
        .values_mut()
        .iter_mut()
        .zip(large.values().iter().zip(small.values()))
    {
        *o = (w_large * l + w_small * s).clamp(0.0, 1.0);
    }
    out
}

/// Applies the configured weighted perturbation to `clip`.
///
/// Per frame t: `out = clamp(w_large * f_large(v, M_t) + w_small *
/// f_small(v, M_t'))`, where each branch runs its op list restricted to its
/// region and is the identity elsewhere. If either op list names
/// `TemporalShuffle`, the perturbed frames are permuted once at the end and
/// the permutation is recorded on the returned pair.
///
/// Deterministic for a fixed `(clip, masks, cfg)` regardless of thread
/// count.
pub fn apply_perturbation(
    clip: &VideoClip,
    masks: &[MotionMask],
    cfg: &PerturbConfig,
) -> Result<ReconPair, PerturbError> {
    cfg.validate()?;
    if masks.len() != clip.len() {
        return Err(PerturbError::ShapeMismatch(format!(
            "{} masks for {} frames",
            masks.len(),
            clip.len()
        )));
    }
    let (height, width, _) = clip.frame_shape();
    if masks
        .iter()
        .any(|m| m.height() != height || m.width() != width)
    {
        return Err(PerturbError::ShapeMismatch(
            "mask dimensions differ from frame dimensions".to_string(),
        ));
    }

    let mut perturbed: Vec<FrameGrid> = clip
        .frames()
        .par_iter()
        .enumerate()
        .map(|(t, frame)| {
            let region_large = PixelRegion::from_mask(&masks[t]);
            let region_small = PixelRegion::complement_of(&masks[t]);
            let large = run_spatial_ops(frame, &cfg.ops_large, &region_large, cfg.seed, t, STREAM_LARGE);
            let small = run_spatial_ops(frame, &cfg.ops_small, &region_small, cfg.seed, t, STREAM_SMALL);
            weighted_sum(&large, &small, cfg.w_large, cfg.w_small)
        })
        .collect();

    let wants_temporal = cfg
        .ops_large
        .iter()
        .chain(&cfg.ops_small)
        .any(|op| matches!(op, PerturbOp::TemporalShuffle));
    let frame_permutation = if wants_temporal {
        let mut rng = derived_rng(cfg.seed, &[STREAM_TEMPORAL]);
        let (shuffled, perm) = temporal_shuffle(&perturbed, &mut rng);
        perturbed = shuffled;
        Some(perm)
    } else {
        None
    };

    Ok(ReconPair {
        original: clip.clone(),
        perturbed: VideoClip::new(perturbed)?,
        masks: masks.to_vec(),
        frame_permutation,
    })
}
