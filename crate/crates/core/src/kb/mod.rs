//! Gloss/pose data model: keypoints, pose sequences, gloss entries, the
//! searchable knowledge base, keypoint-document parsing, validation,
//! JSONL persistence, and deterministic dataset splits.

mod io;
mod parse;
mod split;
mod validate;

pub use io::{entry_to_json, load_kb, parse_entry_record, save_kb, KB_FORMAT_VERSION};
pub use parse::{parse_mediapipe_frame, parse_openpose_frame};
pub use split::{split_dataset, split_sizes, SplitAssignment};
pub use validate::{validate_kb, ValidationReport, Violation};

use std::collections::HashMap;
use thiserror::Error;

/// Tolerance absorbed when clamping extractor confidences to [0, 1].
pub const CONFIDENCE_TOLERANCE: f64 = 1e-6;

#[derive(Debug, Error)]
pub enum KbError {
    #[error("malformed keypoint document: {0}")]
    MalformedDocument(String),
    #[error("confidence {0} outside [0, 1]")]
    OutOfRangeConfidence(f64),
    #[error("non-finite keypoint component")]
    NonFinite,
    #[error("duplicate ids in split input")]
    DuplicateIds,
    #[error("empty input")]
    EmptyInput,
    #[error("mixed keypoint layouts within one pose sequence")]
    MixedLayouts,
    #[error("fps must be positive and finite, got {0}")]
    InvalidFps(f64),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    #[error("unsupported knowledge-base format version {found:?}, expected {expected:?}")]
    SchemaVersionMismatch { found: String, expected: String },
    #[error("malformed record at line {line}: {message}")]
    MalformedRecord { line: usize, message: String },
}

/// One tracked skeletal landmark: pixel position plus extractor confidence.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Keypoint {
    pub x: f64,
    pub y: f64,
    pub confidence: f64,
}

impl Keypoint {
    /// Builds a keypoint, rejecting non-finite components and confidences
    /// outside [0, 1] beyond [`CONFIDENCE_TOLERANCE`]; values within the
    /// tolerance are clamped to the bound.
    pub fn new(x: f64, y: f64, confidence: f64) -> Result<Self, KbError> {
        if !x.is_finite() || !y.is_finite() || !confidence.is_finite() {
            return Err(KbError::NonFinite);
        }
        if !(-CONFIDENCE_TOLERANCE..=1.0 + CONFIDENCE_TOLERANCE).contains(&confidence) {
            return Err(KbError::OutOfRangeConfidence(confidence));
        }
        Ok(Self {
            x,
            y,
            confidence: confidence.clamp(0.0, 1.0),
        })
    }
}

/// Keypoint rig of a pose frame.
///
/// Counts are fixed per extractor: OpenPose BODY_25 plus two 21-point hands
/// (67), MediaPipe Holistic 33-point pose plus two 21-point hands (75).
/// Face keypoints are not part of the default rigs; `Custom(n)` covers any
/// other arrangement.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PoseLayout {
    OpenPoseBody25Hands,
    MediaPipeHolistic,
    Custom(usize),
}

impl PoseLayout {
    pub const OPENPOSE_POINTS: usize = 67;
    pub const MEDIAPIPE_POINTS: usize = 75;

    pub fn point_count(&self) -> usize {
        match self {
            Self::OpenPoseBody25Hands => Self::OPENPOSE_POINTS,
            Self::MediaPipeHolistic => Self::MEDIAPIPE_POINTS,
            Self::Custom(n) => *n,
        }
    }

    /// Canonical name used in the KB file format.
    pub fn name(&self) -> String {
        match self {
            Self::OpenPoseBody25Hands => "openpose_body25_hands".to_string(),
            Self::MediaPipeHolistic => "mediapipe_holistic".to_string(),
            Self::Custom(n) => format!("custom:{n}"),
        }
    }

    /// Inverse of [`PoseLayout::name`].
    pub fn from_name(name: &str) -> Option<Self> {
        match name {
            "openpose_body25_hands" => Some(Self::OpenPoseBody25Hands),
            "mediapipe_holistic" => Some(Self::MediaPipeHolistic),
            _ => name
                .strip_prefix("custom:")
                .and_then(|n| n.parse().ok())
                .map(Self::Custom),
        }
    }

    /// Layout for a parsed point count: the named rig when the count matches
    /// it exactly, `Custom(n)` otherwise.
    fn for_count(count: usize, preferred: PoseLayout) -> PoseLayout {
        if count == preferred.point_count() {
            preferred
        } else {
            PoseLayout::Custom(count)
        }
    }
}

/// One frame of skeletal keypoints in a fixed layout.
#[derive(Debug, Clone, PartialEq)]
pub struct PoseFrame {
    layout: PoseLayout,
    points: Vec<Keypoint>,
}

impl PoseFrame {
    pub fn new(layout: PoseLayout, points: Vec<Keypoint>) -> Result<Self, KbError> {
        if points.len() != layout.point_count() {
            return Err(KbError::MalformedDocument(format!(
                "layout {} expects {} points, got {}",
                layout.name(),
                layout.point_count(),
                points.len()
            )));
        }
        Ok(Self { layout, points })
    }

    pub fn layout(&self) -> PoseLayout {
        self.layout
    }

    pub fn points(&self) -> &[Keypoint] {
        &self.points
    }
}

/// Time-indexed skeletal keypoints, all frames sharing one layout.
///
/// An empty frame list is representable so that [`validate_kb`] can report
/// it; every other constructor invariant is enforced here.
#[derive(Debug, Clone, PartialEq)]
pub struct PoseSequence {
    frames: Vec<PoseFrame>,
    fps: f64,
}

impl PoseSequence {
    pub fn new(frames: Vec<PoseFrame>, fps: f64) -> Result<Self, KbError> {
        if !(fps.is_finite() && fps > 0.0) {
            return Err(KbError::InvalidFps(fps));
        }
        if let Some(first) = frames.first() {
            if frames.iter().any(|f| f.layout() != first.layout()) {
                return Err(KbError::MixedLayouts);
            }
        }
        Ok(Self { frames, fps })
    }

    pub fn frames(&self) -> &[PoseFrame] {
        &self.frames
    }

    pub fn fps(&self) -> f64 {
        self.fps
    }

    pub fn layout(&self) -> Option<PoseLayout> {
        self.frames.first().map(|f| f.layout())
    }
}

/// A CSL gloss symbol paired with its standard pose sequence, optional
/// retrieval embedding, and declared synonyms.
#[derive(Debug, Clone, PartialEq)]
pub struct GlossEntry {
    pub symbol: String,
    pub pose: PoseSequence,
    pub embedding: Option<Vec<f64>>,
    pub synonyms: Vec<String>,
}

impl GlossEntry {
    pub fn new(symbol: impl Into<String>, pose: PoseSequence) -> Self {
        Self {
            symbol: symbol.into(),
            pose,
            embedding: None,
            synonyms: Vec::new(),
        }
    }

    pub fn with_embedding(mut self, embedding: Vec<f64>) -> Self {
        self.embedding = Some(embedding);
        self
    }

    pub fn with_synonyms(mut self, synonyms: Vec<String>) -> Self {
        self.synonyms = synonyms;
        self
    }
}

/// The searchable store behind vocabulary resolution.
///
/// Entries are kept in insertion order and indexed by symbol (first
/// occurrence wins); duplicate symbols remain representable so that
/// [`validate_kb`] can report them instead of silently dropping data.
#[derive(Debug, Clone)]
pub struct KnowledgeBase {
    entries: Vec<GlossEntry>,
    index: HashMap<String, usize>,
    embedding_dim: usize,
    version: String,
}

impl KnowledgeBase {
    pub fn new(embedding_dim: usize) -> Self {
        Self {
            entries: Vec::new(),
            index: HashMap::new(),
            embedding_dim,
            version: KB_FORMAT_VERSION.to_string(),
        }
    }

    pub fn push(&mut self, entry: GlossEntry) {
        let idx = self.entries.len();
        self.index.entry(entry.symbol.clone()).or_insert(idx);
        self.entries.push(entry);
    }

    pub fn get(&self, symbol: &str) -> Option<&GlossEntry> {
        self.index.get(symbol).map(|&i| &self.entries[i])
    }

    pub fn contains_symbol(&self, symbol: &str) -> bool {
        self.index.contains_key(symbol)
    }

    pub fn entries(&self) -> &[GlossEntry] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn embedding_dim(&self) -> usize {
        self.embedding_dim
    }

    pub fn version(&self) -> &str {
        &self.version
    }

    pub(crate) fn set_version(&mut self, version: String) {
        self.version = version;
    }
}

impl PartialEq for KnowledgeBase {
    fn eq(&self, other: &Self) -> bool {
        // The index is derived from entries, so it carries no extra state.
        self.entries == other.entries
            && self.embedding_dim == other.embedding_dim
            && self.version == other.version
    }
}


#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn keypoint_rejects_non_finite() {
        assert!(matches!(
            Keypoint::new(f64::NAN, 0.0, 0.5),
            Err(KbError::NonFinite)
        ));
        assert!(matches!(
            Keypoint::new(0.0, f64::INFINITY, 0.5),
            Err(KbError::NonFinite)
        ));
    }

    #[test]
    fn keypoint_clamps_confidence_within_tolerance() {
        let kp = Keypoint::new(0.0, 0.0, 1.0 + 5e-7).unwrap();
        assert_eq!(kp.confidence, 1.0);
        let kp = Keypoint::new(0.0, 0.0, -5e-7).unwrap();
        assert_eq!(kp.confidence, 0.0);
        assert!(matches!(
            Keypoint::new(0.0, 0.0, 1.5),
            Err(KbError::OutOfRangeConfidence(_))
        ));
    }

    #[test]
    fn layout_names_round_trip() {
        for layout in [
            PoseLayout::OpenPoseBody25Hands,
            PoseLayout::MediaPipeHolistic,
            PoseLayout::Custom(5),
        ] {
            assert_eq!(PoseLayout::from_name(&layout.name()), Some(layout));
        }
        assert_eq!(PoseLayout::from_name("custom:x"), None);
        assert_eq!(PoseLayout::from_name("bogus"), None);
    }

    #[test]
    fn pose_frame_checks_point_count() {
        let pts = vec![Keypoint::new(0.0, 0.0, 1.0).unwrap()];
        assert!(PoseFrame::new(PoseLayout::Custom(1), pts.clone()).is_ok());
        assert!(PoseFrame::new(PoseLayout::Custom(2), pts).is_err());
    }

    #[test]
    fn pose_sequence_rejects_mixed_layouts_and_bad_fps() {
        let a = PoseFrame::new(
            PoseLayout::Custom(1),
            vec![Keypoint::new(0.0, 0.0, 1.0).unwrap()],
        )
        .unwrap();
        let b = PoseFrame::new(
            PoseLayout::Custom(2),
            vec![
                Keypoint::new(0.0, 0.0, 1.0).unwrap(),
                Keypoint::new(1.0, 1.0, 1.0).unwrap(),
            ],
        )
        .unwrap();
        assert!(matches!(
            PoseSequence::new(vec![a.clone(), b], 25.0),
            Err(KbError::MixedLayouts)
        ));
        assert!(matches!(
            PoseSequence::new(vec![a], 0.0),
            Err(KbError::InvalidFps(_))
        ));
    }

    #[test]
    fn kb_lookup_uses_first_occurrence() {
        let mut kb = KnowledgeBase::new(2);
        kb.push(test_support::entry("a", Some(vec![1.0, 0.0])));
        kb.push(test_support::entry("a", Some(vec![0.0, 1.0])));
        assert_eq!(kb.len(), 2);
        assert_eq!(kb.get("a").unwrap().embedding, Some(vec![1.0, 0.0]));
    }
}
