//! Self-supervised pretraining input generation: fast-motion detection over
//! landmarks, spatial masks, the five weighted perturbations, and the
//! reconstruction loss.

mod apply;
mod io;
mod loss;
mod motion;
mod ops;

pub use apply::apply_perturbation;
pub use io::{load_clip, load_landmarks, save_clip, save_landmarks, SPC1_MAGIC};
pub use loss::reconstruction_loss;
pub use motion::{fast_motion_mask, landmark_speed};
pub use ops::{
    block_occlude, local_gaussian_noise, pixel_shuffle, random_pixel_replace, temporal_shuffle,
    PixelRegion,
};

use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::kb::Keypoint;

#[derive(Debug, Error)]
pub enum PerturbError {
    #[error("clip has no landmarks")]
    MissingLandmarks,
    #[error("clip has {frames} frame(s); at least 2 are required")]
    TooShort { frames: usize },
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error("weights must be in [0, 1] and sum to 1, got w_large={w_large}, w_small={w_small}")]
    InvalidWeights { w_large: f64, w_small: f64 },
    #[error("speed threshold must be positive and finite, got {0}")]
    InvalidThreshold(f64),
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("invalid frame: {0}")]
    InvalidFrame(String),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    #[error("malformed clip data: {0}")]
    MalformedClip(String),
}

/// Dense per-frame pixel grid with values in [0, 1].
///
/// Layout is row-major with interleaved channels: index
/// `(y * width + x) * channels + c`.
#[derive(Debug, Clone, PartialEq)]
pub struct FrameGrid {
    height: usize,
    width: usize,
    channels: usize,
    values: Vec<f64>,
}

impl FrameGrid {
    pub fn new(
        height: usize,
        width: usize,
        channels: usize,
        values: Vec<f64>,
    ) -> Result<Self, PerturbError> {
        if height == 0 || width == 0 {
            return Err(PerturbError::InvalidFrame(format!(
                "degenerate frame {height}x{width}"
            )));
        }
        if channels != 1 && channels != 3 {
            return Err(PerturbError::InvalidFrame(format!(
                "channels must be 1 or 3, got {channels}"
            )));
        }
        if values.len() != height * width * channels {
            return Err(PerturbError::InvalidFrame(format!(
                "expected {} values for {height}x{width}x{channels}, got {}",
                height * width * channels,
                values.len()
            )));
        }
        if values.iter().any(|v| !v.is_finite() || *v < 0.0 || *v > 1.0) {
            return Err(PerturbError::InvalidFrame(
                "pixel values must be finite and within [0, 1]".to_string(),
            ));
        }
        Ok(Self {
            height,
            width,
            channels,
            values,
        })
    }

    /// Constant-valued frame, handy for tests and synthetic clips.
    pub fn filled(
        height: usize,
        width: usize,
        channels: usize,
        value: f64,
    ) -> Result<Self, PerturbError> {
        Self::new(height, width, channels, vec![value; height * width * channels])
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn channels(&self) -> usize {
        self.channels
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub(crate) fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn shape(&self) -> (usize, usize, usize) {
        (self.height, self.width, self.channels)
    }

    pub fn pixel_count(&self) -> usize {
        self.height * self.width
    }

    pub fn value(&self, y: usize, x: usize, channel: usize) -> f64 {
        self.values[(y * self.width + x) * self.channels + channel]
    }

    pub fn set_value(&mut self, y: usize, x: usize, channel: usize, v: f64) {
        self.values[(y * self.width + x) * self.channels + channel] = v;
    }
}

/// A clip of uniformly shaped frames with optional per-frame landmarks.
#[derive(Debug, Clone, PartialEq)]
pub struct VideoClip {
    frames: Vec<FrameGrid>,
    landmarks: Option<Vec<Vec<Keypoint>>>,
}

impl VideoClip {
    pub fn new(frames: Vec<FrameGrid>) -> Result<Self, PerturbError> {
        if frames.is_empty() {
            return Err(PerturbError::InvalidFrame("clip has no frames".to_string()));
        }
        let shape = frames[0].shape();
        if frames.iter().any(|f| f.shape() != shape) {
            return Err(PerturbError::ShapeMismatch(
                "clip frames differ in shape".to_string(),
            ));
        }
        Ok(Self {
            frames,
            landmarks: None,
        })
    }

    /// Attaches per-frame landmarks. Every frame must carry the same number
    /// of points so speeds pair landmark `i` across consecutive frames.
    pub fn with_landmarks(mut self, landmarks: Vec<Vec<Keypoint>>) -> Result<Self, PerturbError> {
        if landmarks.len() != self.frames.len() {
            return Err(PerturbError::ShapeMismatch(format!(
                "{} landmark frames for {} video frames",
                landmarks.len(),
                self.frames.len()
            )));
        }
        let count = landmarks[0].len();
        if landmarks.iter().any(|l| l.len() != count) {
            return Err(PerturbError::ShapeMismatch(
                "landmark count varies across frames".to_string(),
            ));
        }
        self.landmarks = Some(landmarks);
        Ok(self)
    }

    pub fn frames(&self) -> &[FrameGrid] {
        &self.frames
    }

    pub fn landmarks(&self) -> Option<&[Vec<Keypoint>]> {
        self.landmarks.as_deref()
    }

    pub fn frame_shape(&self) -> (usize, usize, usize) {
        self.frames[0].shape()
    }

    pub fn len(&self) -> usize {
        self.frames.len()
    }

    pub fn is_empty(&self) -> bool {
        self.frames.is_empty()
    }
}

/// Per-frame boolean pixel grid marking the fast-moving region.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MotionMask {
    height: usize,
    width: usize,
    inside: Vec<bool>,
}

impl MotionMask {
    pub fn empty(height: usize, width: usize) -> Self {
        Self {
            height,
            width,
            inside: vec![false; height * width],
        }
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn contains(&self, y: usize, x: usize) -> bool {
        self.inside[y * self.width + x]
    }

    pub(crate) fn set(&mut self, y: usize, x: usize) {
        self.inside[y * self.width + x] = true;
    }

    pub fn count(&self) -> usize {
        self.inside.iter().filter(|&&b| b).count()
    }

    pub fn as_slice(&self) -> &[bool] {
        &self.inside
    }
}

/// The five perturbation primitives.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "op")]
pub enum PerturbOp {
    /// Permute pixel positions within the region.
    PixelShuffle,
    /// Overwrite each region pixel, with probability `p`, by another
    /// region pixel's value (blur-like).
    RandomPixelReplace { p: f64 },
    /// Zero one random `block_h` x `block_w` block intersected with the
    /// region.
    BlockOcclude { block_h: usize, block_w: usize },
    /// Add N(0, sigma^2) per value, clamped back to [0, 1].
    LocalGaussianNoise { sigma: f64 },
    /// Permute whole frames; applied once per clip after spatial ops.
    TemporalShuffle,
}

impl PerturbOp {
    fn validate(&self) -> Result<(), PerturbError> {
        match self {
            Self::RandomPixelReplace { p } => {
                if !(0.0..=1.0).contains(p) || !p.is_finite() {
                    return Err(PerturbError::InvalidConfig(format!(
                        "random_pixel_replace probability {p} outside [0, 1]"
                    )));
                }
            }
            Self::BlockOcclude { block_h, block_w } => {
                if *block_h == 0 || *block_w == 0 {
                    return Err(PerturbError::InvalidConfig(
                        "block_occlude blocks must be at least 1x1".to_string(),
                    ));
                }
            }
            Self::LocalGaussianNoise { sigma } => {
                if *sigma < 0.0 || !sigma.is_finite() {
                    return Err(PerturbError::InvalidConfig(format!(
                        "gaussian sigma {sigma} must be non-negative"
                    )));
                }
            }
            Self::PixelShuffle | Self::TemporalShuffle => {}
        }
        Ok(())
    }
}

impl std::fmt::Display for PerturbOp {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Self::PixelShuffle => write!(f, "pixel_shuffle"),
            Self::RandomPixelReplace { p } => write!(f, "random_pixel_replace:{p}"),
            Self::BlockOcclude { block_h, block_w } => {
                write!(f, "block_occlude:{block_h}x{block_w}")
            }
            Self::LocalGaussianNoise { sigma } => write!(f, "gaussian_noise:{sigma}"),
            Self::TemporalShuffle => write!(f, "temporal_shuffle"),
        }
    }
}

impl FromStr for PerturbOp {
    type Err = String;

    /// Parses the CLI spellings: `pixel_shuffle`, `random_pixel_replace[:p]`,
    /// `block_occlude:HxW`, `gaussian_noise:sigma`, `temporal_shuffle`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let (name, arg) = match s.split_once(':') {
            Some((n, a)) => (n, Some(a)),
            None => (s, None),
        };
        let op = match (name, arg) {
            ("pixel_shuffle", None) => Self::PixelShuffle,
            ("random_pixel_replace", None) => Self::RandomPixelReplace { p: 0.5 },
            ("random_pixel_replace", Some(a)) => Self::RandomPixelReplace {
                p: a.parse().map_err(|_| format!("bad probability {a:?}"))?,
            },
            ("block_occlude", Some(a)) => {
                let (h, w) = a
                    .split_once('x')
                    .ok_or_else(|| format!("expected HxW, got {a:?}"))?;
                Self::BlockOcclude {
                    block_h: h.parse().map_err(|_| format!("bad block height {h:?}"))?,
                    block_w: w.parse().map_err(|_| format!("bad block width {w:?}"))?,
                }
            }
            ("gaussian_noise", Some(a)) => Self::LocalGaussianNoise {
                sigma: a.parse().map_err(|_| format!("bad sigma {a:?}"))?,
            },
            ("temporal_shuffle", None) => Self::TemporalShuffle,
            _ => return Err(format!("unknown perturbation op {s:?}")),
        };
        op.validate().map_err(|e| e.to_string())?;
        Ok(op)
    }
}

/// Full perturbation configuration (Eqs. for speed threshold, mask radius,
/// and the weighted large/small split).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PerturbConfig {
    /// Speed threshold in pixels/frame; landmarks faster than this are
    /// fast-moving.
    pub theta: f64,
    /// Mask radius in pixels around each fast landmark.
    pub radius: f64,
    pub w_large: f64,
    pub w_small: f64,
    /// Ops applied inside the fast-motion mask.
    pub ops_large: Vec<PerturbOp>,
    /// Ops applied inside the mask complement.
    pub ops_small: Vec<PerturbOp>,
    pub seed: u64,
}

impl Default for PerturbConfig {
    fn default() -> Self {
        Self {
            theta: 2.0,
            radius: 15.0,
            w_large: 0.7,
            w_small: 0.3,
            ops_large: vec![
                PerturbOp::PixelShuffle,
                PerturbOp::BlockOcclude {
                    block_h: 4,
                    block_w: 4,
                },
            ],
            ops_small: vec![PerturbOp::LocalGaussianNoise { sigma: 0.05 }],
            seed: 0,
        }
    }
}

impl PerturbConfig {
    pub fn validate(&self) -> Result<(), PerturbError> {
        if !(self.theta.is_finite() && self.theta > 0.0) {
            return Err(PerturbError::InvalidThreshold(self.theta));
        }
        if !(self.radius.is_finite() && self.radius >= 0.0) {
            return Err(PerturbError::InvalidConfig(format!(
                "radius {} must be non-negative",
                self.radius
            )));
        }
        let in_range = |w: f64| w.is_finite() && (0.0..=1.0).contains(&w);
        if !in_range(self.w_large)
            || !in_range(self.w_small)
            || (self.w_large + self.w_small - 1.0).abs() > 1e-9
        {
            return Err(PerturbError::InvalidWeights {
                w_large: self.w_large,
                w_small: self.w_small,
            });
        }
        for op in self.ops_large.iter().chain(&self.ops_small) {
            op.validate()?;
        }
        Ok(())
    }
}

/// Original clip, perturbed clip, and the masks that drove the split.
///
/// `frame_permutation` records the temporal shuffle when one was applied:
/// perturbed frame `i` is the spatially perturbed original frame
/// `frame_permutation[i]`, so the reconstruction target order is
/// recoverable. Masks stay aligned with the original frame order.
#[derive(Debug, Clone, PartialEq)]
pub struct ReconPair {
    pub original: VideoClip,
    pub perturbed: VideoClip,
    pub masks: Vec<MotionMask>,
    pub frame_permutation: Option<Vec<usize>>,
}
