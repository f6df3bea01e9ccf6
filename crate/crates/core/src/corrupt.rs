//! Corrupted/clean sentence-pair synthesis for training a text-correction
//! network.
//!
//! Operations run in the fixed order shuffle -> delete -> substitute ->
//! insert, each applied per site with its configured probability. Every
//! applied edit is logged against the sequence state at application time,
//! so replaying the log on the clean tokens reproduces the corrupted output
//! exactly; no-op samples (identity permutations, same-token substitutions)
//! are not logged.

use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::seed::{derive_seed, derived_rng};

#[derive(Debug, Error)]
pub enum CorruptError {
    #[error("empty token list")]
    EmptyInput,
    #[error("vocab must be non-empty when substitution or insertion is enabled")]
    EmptyVocab,
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("invalid edit at step {step}: {message}")]
    InvalidEdit { step: usize, message: String },
    #[error("sentence {index}: {source}")]
    AtSentence {
        index: usize,
        #[source]
        source: Box<CorruptError>,
    },
}

/// Per-operation application probabilities and pools.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorruptConfig {
    pub p_shuffle: f64,
    pub p_delete: f64,
    pub p_substitute: f64,
    pub p_insert: f64,
    /// Width of the local shuffle windows; `len` recovers a full shuffle.
    pub shuffle_window: usize,
    /// Substitution/insertion pool.
    pub vocab: Vec<String>,
    pub seed: u64,
    /// When false (the default), deletes that would empty the sentence are
    /// skipped so at least one token survives.
    pub allow_empty: bool,
}

impl Default for CorruptConfig {
    fn default() -> Self {
        Self {
            p_shuffle: 0.15,
            p_delete: 0.15,
            p_substitute: 0.15,
            p_insert: 0.15,
            shuffle_window: 3,
            vocab: Vec::new(),
            seed: 0,
            allow_empty: false,
        }
    }
}

impl CorruptConfig {
    pub fn validate(&self) -> Result<(), CorruptError> {
        let ok = |p: f64| p.is_finite() && (0.0..=1.0).contains(&p);
        if !(ok(self.p_shuffle) && ok(self.p_delete) && ok(self.p_substitute) && ok(self.p_insert))
        {
            return Err(CorruptError::InvalidConfig(
                "probabilities must be in [0, 1]".to_string(),
            ));
        }
        if self.shuffle_window == 0 {
            return Err(CorruptError::InvalidConfig(
                "shuffle window must be positive".to_string(),
            ));
        }
        if self.vocab.is_empty() && (self.p_substitute > 0.0 || self.p_insert > 0.0) {
            return Err(CorruptError::EmptyVocab);
        }
        Ok(())
    }
}

/// One applied edit; positions refer to the sequence state at application
/// time.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "op")]
pub enum Edit {
    /// Reorder the `permutation.len()` tokens starting at `position`:
    /// slot `i` of the window receives the token previously at window
    /// index `permutation[i]`.
    Shuffle {
        position: usize,
        permutation: Vec<usize>,
    },
    Delete {
        position: usize,
    },
    Substitute {
        position: usize,
        token: String,
    },
    Insert {
        position: usize,
        token: String,
    },
}

/// A supervised corruption pair plus the replayable edit log.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CorruptionRecord {
    pub clean: Vec<String>,
    pub corrupted: Vec<String>,
    pub edits: Vec<Edit>,
}

fn apply_edit(tokens: &mut Vec<String>, edit: &Edit, step: usize) -> Result<(), CorruptError> {
    let invalid = |message: String| CorruptError::InvalidEdit { step, message };
    match edit {
        Edit::Shuffle { position, permutation } => {
            let end = position
                .checked_add(permutation.len())
                .filter(|&e| e <= tokens.len())
                .ok_or_else(|| invalid(format!("shuffle window out of range at {position}")))?;
            let mut sorted = permutation.clone();
            sorted.sort_unstable();
            if sorted != (0..permutation.len()).collect::<Vec<_>>() {
                return Err(invalid("shuffle payload is not a permutation".to_string()));
            }
            let window: Vec<String> = tokens[*position..end].to_vec();
            for (slot, &src) in permutation.iter().enumerate() {
                tokens[position + slot] = window[src].clone();
            }
        }
        Edit::Delete { position } => {
            if *position >= tokens.len() {
                return Err(invalid(format!("delete position {position} out of range")));
            }
            tokens.remove(*position);
        }
        Edit::Substitute { position, token } => {
            if *position >= tokens.len() {
                return Err(invalid(format!(
                    "substitute position {position} out of range"
                )));
            }
            tokens[*position] = token.clone();
        }
        Edit::Insert { position, token } => {
            if *position > tokens.len() {
                return Err(invalid(format!("insert position {position} out of range")));
            }
            tokens.insert(*position, token.clone());
        }
    }
    Ok(())
}

/// Replays an edit log against `clean`, reproducing the corrupted tokens.
pub fn replay(clean: &[String], edits: &[Edit]) -> Result<Vec<String>, CorruptError> {
    let mut tokens = clean.to_vec();
    for (step, edit) in edits.iter().enumerate() {
        apply_edit(&mut tokens, edit, step)?;
    }
    Ok(tokens)
}

/// Samples a non-identity permutation of `0..len`, or `None` when the
/// sampled permutation happens to be the identity (a no-op).
fn sample_window_permutation(len: usize, rng: &mut impl Rng) -> Option<Vec<usize>> {
    let mut perm: Vec<usize> = (0..len).collect();
    // Fisher-Yates, explicit so the edit log captures the exact permutation.
    for i in (1..len).rev() {
        let j = rng.gen_range(0..=i);
        perm.swap(i, j);
    }
    if perm.iter().enumerate().all(|(i, &p)| i == p) {
        None
    } else {
        Some(perm)
    }
}

/// Corrupts `tokens` per `cfg`, returning the pair and its edit log.
pub fn corrupt(tokens: &[String], cfg: &CorruptConfig) -> Result<CorruptionRecord, CorruptError> {
    if tokens.is_empty() {
        return Err(CorruptError::EmptyInput);
    }
    cfg.validate()?;

    let mut rng = derived_rng(cfg.seed, &[]);
    let mut current = tokens.to_vec();
    let mut edits = Vec::new();
    let mut log = |tokens: &mut Vec<String>, edit: Edit| {
        apply_edit(tokens, &edit, usize::MAX).expect("generated edits are valid");
        edits.push(edit);
    };

    // Shuffle: one decision per consecutive window. A permutation that
    // leaves the window's token values unchanged (duplicates) is a no-op.
    let mut start = 0;
    while start < current.len() {
        let window = cfg.shuffle_window.min(current.len() - start);
        if window >= 2 && rng.gen::<f64>() < cfg.p_shuffle {
            if let Some(permutation) = sample_window_permutation(window, &mut rng) {
                let changes_values = permutation
                    .iter()
                    .enumerate()
                    .any(|(slot, &src)| current[start + slot] != current[start + src]);
                if changes_values {
                    log(
                        &mut current,
                        Edit::Shuffle {
                            position: start,
                            permutation,
                        },
                    );
                }
            }
        }
        start += window;
    }

    // Delete: one decision per token of the evolving sequence.
    let mut i = 0;
    while i < current.len() {
        if rng.gen::<f64>() < cfg.p_delete && (cfg.allow_empty || current.len() > 1) {
            log(&mut current, Edit::Delete { position: i });
        } else {
            i += 1;
        }
    }

    // Substitute: a vocab sample equal to the current token is a no-op.
    for i in 0..current.len() {
        if rng.gen::<f64>() < cfg.p_substitute {
            let token = cfg.vocab[rng.gen_range(0..cfg.vocab.len())].clone();
            if token != current[i] {
                log(&mut current, Edit::Substitute { position: i, token });
            }
        }
    }

    // Insert: one decision per gap; skip past inserted tokens so a single
    // pass cannot cascade.
    let mut g = 0;
    while g <= current.len() {
        if rng.gen::<f64>() < cfg.p_insert {
            let token = cfg.vocab[rng.gen_range(0..cfg.vocab.len())].clone();
            log(&mut current, Edit::Insert { position: g, token });
            g += 2;
        } else {
            g += 1;
        }
    }

    // Edits that compose to a net identity (delete then re-insert the same
    // token) leave nothing to learn from; report them as the empty log.
    if current == tokens {
        edits.clear();
    }

    Ok(CorruptionRecord {
        clean: tokens.to_vec(),
        corrupted: current,
        edits,
    })
}

/// Emits `pairs_per_sentence` corruption records per input sentence, in
/// sentence-major order, with per-record seeds derived from
/// `(cfg.seed, sentence_index, rep_index)`.
pub fn generate_corpus<'a, I>(
    sentences: I,
    cfg: &'a CorruptConfig,
    pairs_per_sentence: usize,
) -> impl Iterator<Item = Result<CorruptionRecord, CorruptError>> + 'a
where
    I: IntoIterator<Item = Vec<String>>,
    I::IntoIter: 'a,
{
    sentences
        .into_iter()
        .enumerate()
        .flat_map(move |(sentence_index, tokens)| {
            (0..pairs_per_sentence).map(move |rep| {
                let record_cfg = CorruptConfig {
                    seed: derive_seed(cfg.seed, &[sentence_index as u64, rep as u64]),
                    ..cfg.clone()
                };
                corrupt(&tokens, &record_cfg).map_err(|e| CorruptError::AtSentence {
                    index: sentence_index,
                    source: Box::new(e),
                })
            })
        })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::BTreeMap;

    fn toks(words: &[&str]) -> Vec<String> {
        words.iter().map(|w| w.to_string()).collect()
    }

    fn multiset(tokens: &[String]) -> BTreeMap<&String, usize> {
        let mut m = BTreeMap::new();
        for t in tokens {
            *m.entry(t).or_insert(0) += 1;
        }
        m
    }

    fn zeroed(seed: u64) -> CorruptConfig {
        CorruptConfig {
            p_shuffle: 0.0,
            p_delete: 0.0,
            p_substitute: 0.0,
            p_insert: 0.0,
            seed,
            ..CorruptConfig::default()
        }
    }

    #[test]
    fn all_zero_probabilities_is_identity() {
        let clean = toks(&["a", "b", "c"]);
        let record = corrupt(&clean, &zeroed(5)).unwrap();
        assert_eq!(record.corrupted, clean);
        assert!(record.edits.is_empty());
    }

    #[test]
    fn delete_all_empties_the_sentence_when_allowed() {
        let cfg = CorruptConfig {
            p_delete: 1.0,
            allow_empty: true,
            ..zeroed(1)
        };
        let record = corrupt(&toks(&["a", "b", "c"]), &cfg).unwrap();
        assert!(record.corrupted.is_empty());
        assert_eq!(record.edits.len(), 3);
    }

    #[test]
    fn min_length_floor_keeps_one_token_by_default() {
        let cfg = CorruptConfig {
            p_delete: 1.0,
            ..zeroed(1)
        };
        let record = corrupt(&toks(&["a", "b", "c"]), &cfg).unwrap();
        assert_eq!(record.corrupted.len(), 1);
    }

    #[test]
    fn identity_outcomes_always_have_empty_edit_logs() {
        // Shuffling a window of identical tokens never changes values, so
        // no edit is recorded for any seed.
        let clean = toks(&["x", "x", "x", "x"]);
        for seed in 0..50 {
            let cfg = CorruptConfig {
                p_shuffle: 1.0,
                shuffle_window: 4,
                ..zeroed(seed)
            };
            let record = corrupt(&clean, &cfg).unwrap();
            assert_eq!(record.corrupted, clean);
            assert!(record.edits.is_empty(), "seed {seed}");
        }
        // And generally: corrupted == clean implies an empty log.
        let vocab = vec!["a".to_string()];
        for seed in 0..200 {
            let cfg = CorruptConfig {
                p_delete: 1.0,
                p_insert: 1.0,
                vocab: vocab.clone(),
                allow_empty: true,
                ..zeroed(seed)
            };
            let record = corrupt(&toks(&["a"]), &cfg).unwrap();
            if record.corrupted == record.clean {
                assert!(record.edits.is_empty(), "seed {seed}");
            }
        }
    }

    #[test]
    fn full_window_shuffle_preserves_multiset() {
        let clean = toks(&["a", "b", "c", "d", "e"]);
        let cfg = CorruptConfig {
            p_shuffle: 1.0,
            shuffle_window: 5,
            ..zeroed(3)
        };
        let record = corrupt(&clean, &cfg).unwrap();
        assert_eq!(multiset(&record.corrupted), multiset(&clean));
    }

    #[test]
    fn replay_of_empty_edits_is_clean() {
        let clean = toks(&["x", "y"]);
        assert_eq!(replay(&clean, &[]).unwrap(), clean);
    }

    #[test]
    fn replay_single_delete() {
        let clean = toks(&["a", "b", "c"]);
        let out = replay(&clean, &[Edit::Delete { position: 1 }]).unwrap();
        assert_eq!(out, toks(&["a", "c"]));
    }

    #[test]
    fn replay_substitute_then_insert() {
        let clean = toks(&["a", "b"]);
        let edits = vec![
            Edit::Substitute {
                position: 1,
                token: "x".to_string(),
            },
            Edit::Insert {
                position: 0,
                token: "y".to_string(),
            },
        ];
        assert_eq!(replay(&clean, &edits).unwrap(), toks(&["y", "a", "x"]));
    }

    #[test]
    fn replay_rejects_out_of_range_edits() {
        let clean = toks(&["a"]);
        assert!(matches!(
            replay(&clean, &[Edit::Delete { position: 3 }]),
            Err(CorruptError::InvalidEdit { step: 0, .. })
        ));
        assert!(matches!(
            replay(
                &clean,
                &[Edit::Shuffle {
                    position: 0,
                    permutation: vec![0, 0]
                }]
            ),
            Err(CorruptError::InvalidEdit { .. })
        ));
    }

    #[test]
    fn replay_closure_over_random_configs() {
        let vocab: Vec<String> = ["红", "绿", "蓝", "黄"].iter().map(|s| s.to_string()).collect();
        for seed in 0..200 {
            let cfg = CorruptConfig {
                p_shuffle: 0.4,
                p_delete: 0.3,
                p_substitute: 0.4,
                p_insert: 0.3,
                shuffle_window: 3,
                vocab: vocab.clone(),
                seed,
                allow_empty: seed % 2 == 0,
            };
            let clean = toks(&["我", "们", "去", "公", "园", "玩"]);
            let record = corrupt(&clean, &cfg).unwrap();
            assert_eq!(
                replay(&record.clean, &record.edits).unwrap(),
                record.corrupted,
                "seed {seed}"
            );
        }
    }

    #[test]
    fn corrupt_errors() {
        assert!(matches!(
            corrupt(&[], &zeroed(0)),
            Err(CorruptError::EmptyInput)
        ));
        let cfg = CorruptConfig {
            p_substitute: 0.5,
            vocab: Vec::new(),
            ..zeroed(0)
        };
        assert!(matches!(
            corrupt(&toks(&["a"]), &cfg),
            Err(CorruptError::EmptyVocab)
        ));
        let cfg = CorruptConfig {
            p_delete: 1.5,
            ..zeroed(0)
        };
        assert!(matches!(
            corrupt(&toks(&["a"]), &cfg),
            Err(CorruptError::InvalidConfig(_))
        ));
    }

    #[test]
    fn corpus_is_sentence_major_and_deterministic() {
        let sentences = vec![toks(&["a", "b"]), toks(&["c", "d"])];
        let cfg = CorruptConfig {
            p_shuffle: 1.0,
            shuffle_window: 2,
            seed: 9,
            ..zeroed(9)
        };
        let records: Vec<_> = generate_corpus(sentences.clone(), &cfg, 3)
            .collect::<Result<_, _>>()
            .unwrap();
        assert_eq!(records.len(), 6);
        for (i, record) in records.iter().enumerate() {
            assert_eq!(record.clean, sentences[i / 3]);
        }
        let again: Vec<_> = generate_corpus(sentences.clone(), &cfg, 3)
            .collect::<Result<_, _>>()
            .unwrap();
        assert_eq!(records, again);
        assert_eq!(generate_corpus(sentences, &cfg, 0).count(), 0);
    }

    #[test]
    fn corpus_errors_carry_the_sentence_index() {
        let sentences = vec![toks(&["a"]), Vec::new()];
        let cfg = zeroed(0);
        let results: Vec<_> = generate_corpus(sentences, &cfg, 1).collect();
        assert!(results[0].is_ok());
        assert!(matches!(
            results[1].as_ref().unwrap_err(),
            CorruptError::AtSentence { index: 1, .. }
        ));
    }
}
