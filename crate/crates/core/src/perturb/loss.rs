//! Reconstruction loss between two clips.

use super::{PerturbError, VideoClip};

/// Mean over frames of the squared Frobenius distance:
/// `(1/T) * sum_t sum_pixels (a - b)^2`.
///
/// Symmetric, non-negative, and exactly zero iff the clips are identical.
/// The per-frame sum runs over every pixel and channel; no per-pixel
/// averaging is applied.
pub fn reconstruction_loss(a: &VideoClip, b: &VideoClip) -> Result<f64, PerturbError> {
    if a.len() != b.len() {
        return Err(PerturbError::ShapeMismatch(format!(
            "{} frames vs {}",
            a.len(),
            b.len()
        )));
    }
    if a.frame_shape() != b.frame_shape() {
        return Err(PerturbError::ShapeMismatch(format!(
            "{:?} vs {:?}",
            a.frame_shape(),
            b.frame_shape()
        )));
    }
    let mut total = 0.0;
    for (fa, fb) in a.frames().iter().zip(b.frames()) {
        let mut frame_err = 0.0;
        for (&va, &vb) in fa.values().iter().zip(fb.values()) {
            let d = va - vb;
            frame_err += d * d;
        }
        total += frame_err;
    }
    Ok(total / a.len() as f64)
}
