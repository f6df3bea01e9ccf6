//! Landmark speed and fast-motion masks.

use super::{MotionMask, PerturbError, VideoClip};
use crate::kb::Keypoint;

/// Euclidean movement speed between the same landmark in consecutive
/// frames, in pixels/frame.
pub fn landmark_speed(prev: &Keypoint, curr: &Keypoint) -> f64 {
    ((curr.x - prev.x).powi(2) + (curr.y - prev.y).powi(2)).sqrt()
}

/// Builds one mask per frame marking every pixel within `radius` of a
/// landmark whose speed since the previous frame exceeds `theta`.
///
/// Frame 0 has an empty mask: speed needs a predecessor frame. Distances
/// use the unrounded landmark coordinates against integer pixel centers,
/// so the rasterization is exactly the radius-`radius` disk.
pub fn fast_motion_mask(
    clip: &VideoClip,
    theta: f64,
    radius: f64,
) -> Result<Vec<MotionMask>, PerturbError> {
    if !(theta.is_finite() && theta > 0.0) {
        return Err(PerturbError::InvalidThreshold(theta));
    }
    if !(radius.is_finite() && radius >= 0.0) {
        return Err(PerturbError::InvalidConfig(format!(
            "radius {radius} must be non-negative"
        )));
    }
    let landmarks = clip.landmarks().ok_or(PerturbError::MissingLandmarks)?;
    if clip.len() < 2 {
        return Err(PerturbError::TooShort { frames: clip.len() });
    }

    let (height, width, _) = clip.frame_shape();
    let mut masks = vec![MotionMask::empty(height, width)];
    for t in 1..clip.len() {
        let mut mask = MotionMask::empty(height, width);
        for (prev, curr) in landmarks[t - 1].iter().zip(&landmarks[t]) {
            if landmark_speed(prev, curr) > theta {
                rasterize_disk(&mut mask, curr.x, curr.y, radius);
            }
        }
        masks.push(mask);
    }
    Ok(masks)
}

fn rasterize_disk(mask: &mut MotionMask, cx: f64, cy: f64, radius: f64) {
    let y_lo = ((cy - radius).ceil().max(0.0)) as usize;
    let y_hi = ((cy + radius).floor().min(mask.height() as f64 - 1.0)) as isize;
    let x_lo = ((cx - radius).ceil().max(0.0)) as usize;
    let x_hi = ((cx + radius).floor().min(mask.width() as f64 - 1.0)) as isize;
    if y_hi < 0 || x_hi < 0 || (cy - radius) > mask.height() as f64 - 1.0
        || (cx - radius) > mask.width() as f64 - 1.0
    {
        return;
    }
    let r2 = radius * radius;
    for y in y_lo..=y_hi as usize {
        for x in x_lo..=x_hi as usize {
            let dx = x as f64 - cx;
            let dy = y as f64 - cy;
            if dx * dx + dy * dy <= r2 {
                mask.set(y, x);
            }
        }
    }
}
