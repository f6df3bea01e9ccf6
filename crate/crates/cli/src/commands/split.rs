//! `signpipe split`: deterministic 80/10/10 partition of an id list.

use std::path::PathBuf;

use anyhow::{Context, Result};
use serde::{Deserialize, Serialize};

use signpipe_core::kb::split_dataset;

use super::{read_nonempty_lines, Ctx};

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SplitConfig {
    pub from: PathBuf,
    pub output: PathBuf,
    pub seed: u64,
    pub manifest: Option<PathBuf>,
}

impl SplitConfig {
    pub fn execute(&self, ctx: &Ctx) -> Result<()> {
        let ids = read_nonempty_lines(&self.from)?;
        let assignment = split_dataset(&ids, self.seed)?;
        let json = serde_json::to_string(&assignment)?;
        std::fs::write(&self.output, json + "\n")
            .with_context(|| format!("cannot write {}", self.output.display()))?;
        ctx.note(format!(
            "split {} ids into {}/{}/{} (seed {})",
            ids.len(),
            assignment.train.len(),
            assignment.dev.len(),
            assignment.test.len(),
            self.seed
        ));
        Ok(())
    }
}
