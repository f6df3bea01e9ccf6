//! Core primitives for a bidirectional sign-language data pipeline:
//! gloss knowledge bases, cascading vocabulary resolution, landmark-weighted
//! video perturbation, distillation-loss arithmetic, text corruption
//! synthesis, and the evaluation-metric stack.
//!
//! Everything here is deterministic given explicit seeds and safe to share
//! read-only across threads; no module spawns hidden I/O or global state.

pub mod corrupt;
pub mod cvr;
pub mod distill;
pub mod kb;
pub mod metrics;
pub mod perturb;
pub mod seed;
