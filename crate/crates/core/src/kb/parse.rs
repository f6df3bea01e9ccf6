//! Keypoint-document parsers for the two supported extractors.
//!
//! Both take the flat numeric payload of one frame. OpenPose documents are
//! always (x, y, confidence) triples; MediaPipe documents may omit
//! confidence, in which case every point gets confidence 1.0 (some MediaPipe
//! streams emit visibility only for a subset of solutions).

use super::{Keypoint, KbError, PoseFrame, PoseLayout};

fn keypoints_from_triples(values: &[f64]) -> Result<Vec<Keypoint>, KbError> {
    values
        .chunks_exact(3)
        .map(|t| Keypoint::new(t[0], t[1], t[2]))
        .collect()
}

/// Parses a flat `[x, y, c, ...]` OpenPose keypoint document.
///
/// The layout is `OpenPoseBody25Hands` when the document holds exactly 67
/// triples and `Custom(n)` for any other count. Point order is preserved;
/// nothing is dropped.
pub fn parse_openpose_frame(values: &[f64]) -> Result<PoseFrame, KbError> {
    if values.is_empty() {
        return Err(KbError::MalformedDocument(
            "empty keypoint document".to_string(),
        ));
    }
    if !values.len().is_multiple_of(3) {
        return Err(KbError::MalformedDocument(format!(
            "{} values is not a whole number of (x, y, c) triples",
            values.len()
        )));
    }
    let points = keypoints_from_triples(values)?;
    let layout = PoseLayout::for_count(points.len(), PoseLayout::OpenPoseBody25Hands);
    PoseFrame::new(layout, points)
}

/// Parses a flat MediaPipe Holistic keypoint document.
///
/// Accepts either 75 `(x, y, c)` triples or 75 `(x, y)` pairs; pairs get
/// confidence 1.0. A document of exactly 150 values is always read as pairs
/// (the canonical confidence-less Holistic dump), never as 50 triples.
pub fn parse_mediapipe_frame(values: &[f64]) -> Result<PoseFrame, KbError> {
    if values.is_empty() {
        return Err(KbError::MalformedDocument(
            "empty keypoint document".to_string(),
        ));
    }
    let pair_len = 2 * PoseLayout::MEDIAPIPE_POINTS;
    let points = if values.len() == pair_len {
        values
            .chunks_exact(2)
            .map(|p| Keypoint::new(p[0], p[1], 1.0))
            .collect::<Result<Vec<_>, _>>()?
    } else if values.len().is_multiple_of(3) {
        keypoints_from_triples(values)?
    } else {
        return Err(KbError::MalformedDocument(format!(
            "{} values is neither {} (x, y) pairs nor a whole number of triples",
            values.len(),
            PoseLayout::MEDIAPIPE_POINTS
        )));
    };
    let layout = PoseLayout::for_count(points.len(), PoseLayout::MediaPipeHolistic);
    PoseFrame::new(layout, points)
}
