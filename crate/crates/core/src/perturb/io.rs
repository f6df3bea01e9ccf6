//! Clip and landmark file formats.
//!
//! Clips use the SPC1 binary layout: magic `"SPC1"`, then u32 LE height,
//! width, channels, frame count, then `T*H*W*C` f32 LE values (frame-major,
//! row-major, interleaved channels). Landmarks are JSONL with one
//! `{"points": [[x, y, confidence], ...]}` record per frame.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{FrameGrid, PerturbError, VideoClip};
use crate::kb::Keypoint;

pub const SPC1_MAGIC: &[u8; 4] = b"SPC1";

/// Writes `clip` (frames only) to `path` in the SPC1 format.
///
/// Values are stored as f32, so a reloaded clip may differ from the
/// in-memory f64 values by one rounding step.
pub fn save_clip(clip: &VideoClip, path: impl AsRef<Path>) -> Result<(), PerturbError> {
    let mut out = BufWriter::new(File::create(path)?);
    let (height, width, channels) = clip.frame_shape();
    out.write_all(SPC1_MAGIC)?;
    for dim in [height, width, channels, clip.len()] {
        out.write_all(&(dim as u32).to_le_bytes())?;
    }
    for frame in clip.frames() {
        for &v in frame.values() {
            out.write_all(&(v as f32).to_le_bytes())?;
        }
    }
    out.flush()?;
    Ok(())
}

/// Reads an SPC1 clip written by [`save_clip`]. Landmarks are loaded
/// separately via [`load_landmarks`].
pub fn load_clip(path: impl AsRef<Path>) -> Result<VideoClip, PerturbError> {
    let mut reader = BufReader::new(File::open(path)?);
    let mut magic = [0u8; 4];
    reader.read_exact(&mut magic).map_err(|_| {
        PerturbError::MalformedClip("file shorter than the SPC1 header".to_string())
    })?;
    if &magic != SPC1_MAGIC {
        return Err(PerturbError::MalformedClip(format!(
            "bad magic {magic:?}, expected {SPC1_MAGIC:?}"
        )));
    }
    let mut dims = [0usize; 4];
    for dim in &mut dims {
        let mut buf = [0u8; 4];
        reader.read_exact(&mut buf).map_err(|_| {
            PerturbError::MalformedClip("truncated SPC1 dimension header".to_string())
        })?;
        *dim = u32::from_le_bytes(buf) as usize;
    }
    let [height, width, channels, frame_count] = dims;
    let frame_len = height * width * channels;
    let mut frames = Vec::with_capacity(frame_count);
    let mut buf = vec![0u8; frame_len * 4];
    for t in 0..frame_count {
        reader.read_exact(&mut buf).map_err(|_| {
            PerturbError::MalformedClip(format!("truncated pixel data in frame {t}"))
        })?;
        let values: Vec<f64> = buf
            .chunks_exact(4)
            .map(|b| f32::from_le_bytes([b[0], b[1], b[2], b[3]]) as f64)
            .collect();
        frames.push(FrameGrid::new(height, width, channels, values)?);
    }
    let mut trailing = [0u8; 1];
    if reader.read(&mut trailing)? != 0 {
        return Err(PerturbError::MalformedClip(
            "trailing bytes after declared frame data".to_string(),
        ));
    }
    VideoClip::new(frames)
}

#[derive(Serialize, Deserialize)]
struct LandmarkRecord {
    points: Vec<[f64; 3]>,
}

/// Writes per-frame landmarks as JSONL.
pub fn save_landmarks(
    landmarks: &[Vec<Keypoint>],
    path: impl AsRef<Path>,
) -> Result<(), PerturbError> {
    let mut out = BufWriter::new(File::create(path)?);
    for frame in landmarks {
        let record = LandmarkRecord {
            points: frame.iter().map(|p| [p.x, p.y, p.confidence]).collect(),
        };
        writeln!(
            out,
            "{}",
            serde_json::to_string(&record).expect("landmark record serializes")
        )?;
    }
    out.flush()?;
    Ok(())
}

/// Reads landmarks written by [`save_landmarks`].
pub fn load_landmarks(path: impl AsRef<Path>) -> Result<Vec<Vec<Keypoint>>, PerturbError> {
    let content = std::fs::read_to_string(path)?;
    let mut frames = Vec::new();
    for (i, line) in content.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let record: LandmarkRecord = serde_json::from_str(line).map_err(|e| {
            PerturbError::MalformedClip(format!("landmark line {}: {e}", i + 1))
        })?;
        let points = record
            .points
            .iter()
            .map(|&[x, y, c]| Keypoint::new(x, y, c))
            .collect::<Result<Vec<_>, _>>()
            .map_err(|e| PerturbError::MalformedClip(format!("landmark line {}: {e}", i + 1)))?;
        frames.push(points);
    }
    Ok(frames)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample_clip() -> VideoClip {
        let frames: Vec<FrameGrid> = (0..3)
            .map(|t| {
                let values: Vec<f64> = (0..2 * 2 * 3)
                    .map(|i| ((i + t) % 11) as f64 / 10.0)
                    .collect();
                FrameGrid::new(2, 2, 3, values).unwrap()
            })
            .collect();
        VideoClip::new(frames).unwrap()
    }

    #[test]
    fn clip_round_trip_at_f32_precision() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("clip.spc1");
        let clip = sample_clip();
        save_clip(&clip, &path).unwrap();
        let loaded = load_clip(&path).unwrap();
        assert_eq!(loaded.frame_shape(), clip.frame_shape());
        assert_eq!(loaded.len(), clip.len());
        for (a, b) in loaded.frames().iter().zip(clip.frames()) {
            for (&x, &y) in a.values().iter().zip(b.values()) {
                assert!((x - y).abs() <= f32::EPSILON as f64);
            }
        }
        // Saving the loaded clip again is byte-stable.
        let path2 = dir.path().join("clip2.spc1");
        save_clip(&loaded, &path2).unwrap();
        assert_eq!(
            std::fs::read(&path).unwrap(),
            std::fs::read(&path2).unwrap()
        );
    }

    #[test]
    fn bad_magic_and_truncation_are_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("bad.spc1");
        std::fs::write(&path, b"NOPE").unwrap();
        assert!(matches!(
            load_clip(&path),
            Err(PerturbError::MalformedClip(_))
        ));
        let mut bytes = Vec::new();
        bytes.extend_from_slice(SPC1_MAGIC);
        for dim in [2u32, 2, 1, 5] {
            bytes.extend_from_slice(&dim.to_le_bytes());
        }
        bytes.extend_from_slice(&[0u8; 16]); // only one of five frames
        std::fs::write(&path, bytes).unwrap();
        assert!(matches!(
            load_clip(&path),
            Err(PerturbError::MalformedClip(_))
        ));
    }

    #[test]
    fn landmarks_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("lm.jsonl");
        let landmarks = vec![
            vec![Keypoint::new(1.5, 2.5, 0.9).unwrap()],
            vec![Keypoint::new(3.0, 4.0, 1.0).unwrap()],
        ];
        save_landmarks(&landmarks, &path).unwrap();
        assert_eq!(load_landmarks(&path).unwrap(), landmarks);
    }
}
