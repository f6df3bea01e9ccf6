//! JSONL persistence for knowledge bases.
//!
//! Line 1 is a header record `{"version":"kb/1","embedding_dim":D}`; every
//! following line is one gloss entry. Floats go through serde_json's
//! shortest round-trip encoding, so `load(save(kb)) == kb` bit-for-bit.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{GlossEntry, KbError, Keypoint, KnowledgeBase, PoseFrame, PoseLayout, PoseSequence};

/// Current knowledge-base file format version.
pub const KB_FORMAT_VERSION: &str = "kb/1";

#[derive(Serialize, Deserialize)]
struct Header {
    version: String,
    embedding_dim: usize,
}

#[derive(Serialize, Deserialize)]
struct PoseRecord {
    layout: String,
    fps: f64,
    frames: Vec<Vec<f64>>,
}

#[derive(Serialize, Deserialize)]
struct EntryRecord {
    symbol: String,
    synonyms: Vec<String>,
    embedding: Option<Vec<f64>>,
    pose: PoseRecord,
}

fn pose_to_record(pose: &PoseSequence) -> PoseRecord {
    let layout = pose
        .layout()
        .unwrap_or(PoseLayout::Custom(0))
        .name();
    let frames = pose
        .frames()
        .iter()
        .map(|frame| {
            frame
                .points()
                .iter()
                .flat_map(|p| [p.x, p.y, p.confidence])
                .collect()
        })
        .collect();
    PoseRecord {
        layout,
        fps: pose.fps(),
        frames,
    }
}

fn pose_from_record(record: PoseRecord, line: usize) -> Result<PoseSequence, KbError> {
    let layout = PoseLayout::from_name(&record.layout).ok_or_else(|| KbError::MalformedRecord {
        line,
        message: format!("unknown pose layout {:?}", record.layout),
    })?;
    let mut frames = Vec::with_capacity(record.frames.len());
    for flat in &record.frames {
        if flat.len() != layout.point_count() * 3 {
            return Err(KbError::MalformedRecord {
                line,
                message: format!(
                    "frame holds {} values, layout {} expects {}",
                    flat.len(),
                    record.layout,
                    layout.point_count() * 3
                ),
            });
        }
        let points = flat
            .chunks_exact(3)
            .map(|t| Keypoint::new(t[0], t[1], t[2]))
            .collect::<Result<Vec<_>, _>>()
            .map_err(|e| KbError::MalformedRecord {
                line,
                message: e.to_string(),
            })?;
        frames.push(PoseFrame::new(layout, points).map_err(|e| KbError::MalformedRecord {
            line,
            message: e.to_string(),
        })?);
    }
    PoseSequence::new(frames, record.fps).map_err(|e| KbError::MalformedRecord {
        line,
        message: e.to_string(),
    })
}

/// Parses one entry record (one KB body line). `line` is 1-based and is
/// only used for error reporting.
pub fn parse_entry_record(text: &str, line: usize) -> Result<GlossEntry, KbError> {
    let record: EntryRecord =
        serde_json::from_str(text).map_err(|e| KbError::MalformedRecord {
            line,
            message: e.to_string(),
        })?;
    let pose = pose_from_record(record.pose, line)?;
    Ok(GlossEntry {
        symbol: record.symbol,
        pose,
        embedding: record.embedding,
        synonyms: record.synonyms,
    })
}

pub fn entry_to_json(entry: &GlossEntry) -> String {
    let record = EntryRecord {
        symbol: entry.symbol.clone(),
        synonyms: entry.synonyms.clone(),
        embedding: entry.embedding.clone(),
        pose: pose_to_record(&entry.pose),
    };
    serde_json::to_string(&record).expect("entry record serializes")
}

/// Writes `kb` to `path` in the JSONL format.
pub fn save_kb(kb: &KnowledgeBase, path: impl AsRef<Path>) -> Result<(), KbError> {
    let mut out = BufWriter::new(File::create(path)?);
    let header = Header {
        version: kb.version().to_string(),
        embedding_dim: kb.embedding_dim(),
    };
    writeln!(out, "{}", serde_json::to_string(&header).expect("header"))?;
    for entry in kb.entries() {
        writeln!(out, "{}", entry_to_json(entry))?;
    }
    out.flush()?;
    Ok(())
}

/// Loads a knowledge base saved by [`save_kb`].
///
/// Duplicate symbols are preserved so [`super::validate_kb`] can report
/// them; unknown format versions and malformed records are hard errors.
pub fn load_kb(path: impl AsRef<Path>) -> Result<KnowledgeBase, KbError> {
    let reader = BufReader::new(File::open(path)?);
    let mut lines = reader.lines();

    let header_line = lines.next().ok_or_else(|| KbError::MalformedRecord {
        line: 1,
        message: "missing header line".to_string(),
    })??;
    let header: Header =
        serde_json::from_str(&header_line).map_err(|e| KbError::MalformedRecord {
            line: 1,
            message: e.to_string(),
        })?;
    if header.version != KB_FORMAT_VERSION {
        return Err(KbError::SchemaVersionMismatch {
            found: header.version,
            expected: KB_FORMAT_VERSION.to_string(),
        });
    }

    let mut kb = KnowledgeBase::new(header.embedding_dim);
    kb.set_version(header.version);
    for (i, line) in lines.enumerate() {
        let line_no = i + 2;
        let text = line?;
        if text.trim().is_empty() {
            continue;
        }
        kb.push(parse_entry_record(&text, line_no)?);
    }
    Ok(kb)
}
