//! Distribution-sequence files: JSONL with one `{"t": N, "p": [...]}`
//! record per timestep, `t` strictly increasing from 0.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{DistillError, DistributionSequence};

#[derive(Serialize, Deserialize)]
struct StepRecord {
    t: u32,
    p: Vec<f64>,
}

pub fn save_distribution_file(
    seq: &DistributionSequence,
    path: impl AsRef<Path>,
) -> Result<(), DistillError> {
    let mut out = BufWriter::new(File::create(path)?);
    for (t, p) in seq.steps().iter().enumerate() {
        let record = StepRecord {
            t: t as u32,
            p: p.clone(),
        };
        writeln!(
            out,
            "{}",
            serde_json::to_string(&record).expect("step record serializes")
        )?;
    }
    out.flush()?;
    Ok(())
}

pub fn load_distribution_file(path: impl AsRef<Path>) -> Result<DistributionSequence, DistillError> {
    let content = std::fs::read_to_string(path)?;
    let mut steps = Vec::new();
    for (i, line) in content.lines().enumerate() {
        let line_no = i + 1;
        if line.trim().is_empty() {
            continue;
        }
        let record: StepRecord =
            serde_json::from_str(line).map_err(|e| DistillError::MalformedFile {
                line: line_no,
                message: e.to_string(),
            })?;
        if record.t as usize != steps.len() {
            return Err(DistillError::MalformedFile {
                line: line_no,
                message: format!("timestep {} out of order, expected {}", record.t, steps.len()),
            });
        }
        steps.push(record.p);
    }
    DistributionSequence::new(steps)
}
