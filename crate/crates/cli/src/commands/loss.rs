//! `signpipe loss`: distillation-loss arithmetic over distribution files.

use std::path::PathBuf;

use anyhow::{bail, Context, Result};
use serde::{Deserialize, Serialize};

use signpipe_core::distill::{
    cross_entropy, load_distribution_file, temporal_kl, LossBreakdown, LossWeights,
    SMOOTHING_EPSILON,
};

use super::{read_nonempty_lines, Ctx};

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PairPaths {
    pub p: PathBuf,
    pub q: PathBuf,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CePaths {
    pub predictions: PathBuf,
    pub targets: PathBuf,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LossCommandConfig {
    pub self_pair: Option<PairPaths>,
    pub lm_video_pair: Option<PairPaths>,
    pub lm_t_pair: Option<PairPaths>,
    pub ce: Option<CePaths>,
    pub weights: LossWeights,
    pub output: Option<PathBuf>,
    pub manifest: Option<PathBuf>,
}

#[derive(Serialize)]
struct LossOut {
    #[serde(flatten)]
    breakdown: LossBreakdown,
    weights: LossWeights,
    smoothing_epsilon: f64,
}

fn weighted_pair_term(pair: &Option<PairPaths>, weight: f64, term: &str) -> Result<f64> {
    match pair {
        None => Ok(0.0),
        Some(paths) => {
            let p = load_distribution_file(&paths.p)
                .with_context(|| format!("term {term}: {}", paths.p.display()))?;
            let q = load_distribution_file(&paths.q)
                .with_context(|| format!("term {term}: {}", paths.q.display()))?;
            let kl = temporal_kl(&p, &q).with_context(|| format!("term {term}"))?;
            Ok(weight * kl)
        }
    }
}

impl LossCommandConfig {
    pub fn input_paths(&self) -> Vec<PathBuf> {
        let mut paths = Vec::new();
        for pair in [&self.self_pair, &self.lm_video_pair, &self.lm_t_pair]
            .into_iter()
            .flatten()
        {
            paths.push(pair.p.clone());
            paths.push(pair.q.clone());
        }
        if let Some(ce) = &self.ce {
            paths.push(ce.predictions.clone());
            paths.push(ce.targets.clone());
        }
        paths
    }

    pub fn execute(&self, ctx: &Ctx) -> Result<()> {
        if self.self_pair.is_none()
            && self.lm_video_pair.is_none()
            && self.lm_t_pair.is_none()
            && self.ce.is_none()
        {
            bail!("nothing to compute: give at least one --pairs or --ce");
        }
        let self_kl = weighted_pair_term(&self.self_pair, self.weights.self_kl, "self")?;
        let lm_video_kl =
            weighted_pair_term(&self.lm_video_pair, self.weights.lm_video_kl, "lm-video")?;
        let lm_t_kl = weighted_pair_term(&self.lm_t_pair, self.weights.lm_t_kl, "lm-t")?;
        let ce = match &self.ce {
            None => 0.0,
            Some(paths) => {
                let predicted = load_distribution_file(&paths.predictions)
                    .with_context(|| format!("term ce: {}", paths.predictions.display()))?;
                let targets: Vec<usize> = read_nonempty_lines(&paths.targets)?
                    .iter()
                    .map(|line| {
                        line.trim()
                            .parse()
                            .with_context(|| format!("bad target index {line:?}"))
                    })
                    .collect::<Result<_>>()?;
                self.weights.ce * cross_entropy(&predicted, &targets).context("term ce")?
            }
        };

        let out = LossOut {
            breakdown: LossBreakdown::from_components(self_kl, lm_video_kl, lm_t_kl, ce),
            weights: self.weights,
            smoothing_epsilon: SMOOTHING_EPSILON,
        };
        let json = serde_json::to_string(&out)?;
        match &self.output {
            Some(path) => {
                std::fs::write(path, json.clone() + "\n")
                    .with_context(|| format!("cannot write {}", path.display()))?;
                ctx.note(format!("loss breakdown written to {}", path.display()));
            }
            None => println!("{json}"),
        }
        if ctx.json_stdout() && self.output.is_some() {
            println!("{json}");
        }
        Ok(())
    }
}
