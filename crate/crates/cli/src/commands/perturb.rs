//! `signpipe perturb`: weighted landmark-guided clip perturbation.

use std::path::PathBuf;

use anyhow::{Context, Result};
use serde::{Deserialize, Serialize};

use signpipe_core::perturb::{
    apply_perturbation, fast_motion_mask, load_clip, load_landmarks, reconstruction_loss,
    save_clip, PerturbConfig, PerturbOp,
};

use super::Ctx;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PerturbCommandConfig {
    pub clip: PathBuf,
    pub landmarks: PathBuf,
    pub output: PathBuf,
    /// Metadata JSON destination; defaults to `<output>.meta.json`.
    pub meta: Option<PathBuf>,
    pub theta: f64,
    pub radius: f64,
    pub w_large: f64,
    pub w_small: f64,
    pub ops_large: Vec<PerturbOp>,
    pub ops_small: Vec<PerturbOp>,
    pub seed: u64,
    pub manifest: Option<PathBuf>,
}

#[derive(Serialize)]
struct PerturbMeta<'a> {
    config: &'a PerturbConfig,
    frames: usize,
    mask_pixels: Vec<usize>,
    frame_permutation: Option<Vec<usize>>,
    recon_loss: f64,
}

impl PerturbCommandConfig {
    pub fn execute(&self, ctx: &Ctx) -> Result<()> {
        let clip = load_clip(&self.clip)?
            .with_landmarks(load_landmarks(&self.landmarks)?)
            .map_err(|e| anyhow::anyhow!("landmarks do not match the clip: {e}"))?;
        let config = PerturbConfig {
            theta: self.theta,
            radius: self.radius,
            w_large: self.w_large,
            w_small: self.w_small,
            ops_large: self.ops_large.clone(),
            ops_small: self.ops_small.clone(),
            seed: self.seed,
        };
        config.validate()?;

        let masks = fast_motion_mask(&clip, self.theta, self.radius)?;
        let pair = apply_perturbation(&clip, &masks, &config)?;
        save_clip(&pair.perturbed, &self.output)?;

        let meta = PerturbMeta {
            config: &config,
            frames: clip.len(),
            mask_pixels: masks.iter().map(|m| m.count()).collect(),
            frame_permutation: pair.frame_permutation.clone(),
            recon_loss: reconstruction_loss(&pair.original, &pair.perturbed)?,
        };
        let meta_path = self
            .meta
            .clone()
            .unwrap_or_else(|| PathBuf::from(format!("{}.meta.json", self.output.display())));
        std::fs::write(&meta_path, serde_json::to_string_pretty(&meta)? + "\n")
            .with_context(|| format!("cannot write {}", meta_path.display()))?;
        ctx.note(format!(
            "perturbed {} frame(s), recon loss {:.6}, wrote {}",
            clip.len(),
            meta.recon_loss,
            self.output.display()
        ));
        Ok(())
    }
}
