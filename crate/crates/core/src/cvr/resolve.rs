//! The three-level cascade: direct lookup, embedding retrieval, synonym
//! optimization.

use serde::{Deserialize, Serialize};

use super::search::embedding_search;
use super::tokenize::{tokenize, TokenizeMode};
use super::{
    CvrError, EmbeddingProvider, ResolutionLevel, ResolutionTrace, SymbolPoseSequence,
    SynonymBackend,
};
use crate::kb::{KnowledgeBase, PoseSequence};

/// What to do with tokens no cascade level can resolve.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum UnresolvedPolicy {
    /// Omit the token from the output items; the trace still records it.
    Skip,
    /// Fail the whole sentence.
    Error,
}

/// Tokenizer selection for [`resolve_sentence`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TokenizerKind {
    Char,
    Lexicon,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CascadeConfig {
    /// Minimum cosine similarity for accepting a level-2 match.
    pub accept_threshold: f64,
    /// Maximum synonym proposals requested from the backend at level 3.
    pub max_synonyms: usize,
    pub tokenizer: TokenizerKind,
    pub on_unresolved: UnresolvedPolicy,
}

impl Default for CascadeConfig {
    fn default() -> Self {
        Self {
            accept_threshold: 0.7,
            max_synonyms: 8,
            tokenizer: TokenizerKind::Lexicon,
            on_unresolved: UnresolvedPolicy::Skip,
        }
    }
}

/// Resolves one token through the cascade.
///
/// Level 1 returns immediately on an exact symbol match without touching the
/// provider or backend. Level 2 accepts the embedding argmax iff its score
/// reaches `cfg.accept_threshold`. Level 3 asks the backend for candidates
/// and takes the first one present in the KB. `None` plus an `Unresolved`
/// trace means every level declined.
pub fn resolve_token(
    token: &str,
    context: &[String],
    kb: &KnowledgeBase,
    provider: &dyn EmbeddingProvider,
    backend: &dyn SynonymBackend,
    cfg: &CascadeConfig,
) -> Result<(Option<(String, PoseSequence)>, ResolutionTrace), CvrError> {
    // Level 1: direct lookup.
    if let Some(entry) = kb.get(token) {
        let trace = ResolutionTrace {
            token: token.to_string(),
            level: ResolutionLevel::Direct,
            chosen_symbol: Some(entry.symbol.clone()),
            score: None,
            candidates_examined: 0,
        };
        return Ok((Some((entry.symbol.clone(), entry.pose.clone())), trace));
    }

    // Level 2: embedding retrieval over the whole KB.
    let mut examined = kb.len();
    let (nearest, score) = embedding_search(token, kb, provider)?;
    if score >= cfg.accept_threshold {
        let trace = ResolutionTrace {
            token: token.to_string(),
            level: ResolutionLevel::Embedding,
            chosen_symbol: Some(nearest.symbol.clone()),
            score: Some(score),
            candidates_examined: examined,
        };
        return Ok((Some((nearest.symbol.clone(), nearest.pose.clone())), trace));
    }

    // Level 3: synonym proposals filtered to KB-valid symbols. The first
    // valid candidate wins; no ranking beyond the backend's order.
    let proposals = backend
        .propose(token, context, cfg.max_synonyms)
        .map_err(|e| CvrError::Backend {
            token: token.to_string(),
            message: e.to_string(),
        })?;
    for candidate in &proposals {
        examined += 1;
        if let Some(entry) = kb.get(candidate) {
            let trace = ResolutionTrace {
                token: token.to_string(),
                level: ResolutionLevel::Synonym,
                chosen_symbol: Some(entry.symbol.clone()),
                score: None,
                candidates_examined: examined,
            };
            return Ok((Some((entry.symbol.clone(), entry.pose.clone())), trace));
        }
    }

    Ok((
        None,
        ResolutionTrace {
            token: token.to_string(),
            level: ResolutionLevel::Unresolved,
            chosen_symbol: None,
            score: Some(score),
            candidates_examined: examined,
        },
    ))
}

/// Resolves a batch of sentences, fanning out across the current rayon
/// pool. Providers or backends that declare themselves non-reentrant are
/// called under a mutex, so implementations never see overlapping calls;
/// output order always matches input order.
pub fn resolve_sentences(
    texts: &[impl AsRef<str> + Sync],
    kb: &KnowledgeBase,
    provider: &dyn EmbeddingProvider,
    backend: &dyn SynonymBackend,
    cfg: &CascadeConfig,
) -> Result<Vec<SymbolPoseSequence>, CvrError> {
    use rayon::prelude::*;

    let provider_guard = GuardedProvider::new(provider);
    let backend_guard = GuardedBackend::new(backend);
    texts
        .par_iter()
        .map(|text| {
            resolve_sentence(text.as_ref(), kb, &provider_guard, &backend_guard, cfg)
        })
        .collect()
}

struct GuardedProvider<'a> {
    inner: &'a dyn EmbeddingProvider,
    lock: Option<std::sync::Mutex<()>>,
}

impl<'a> GuardedProvider<'a> {
    fn new(inner: &'a dyn EmbeddingProvider) -> Self {
        let lock = (!inner.is_reentrant()).then(|| std::sync::Mutex::new(()));
        Self { inner, lock }
    }
}

impl EmbeddingProvider for GuardedProvider<'_> {
    fn embed(&self, text: &str) -> Result<Vec<f64>, super::BackendFailure> {
        let _serialize = self.lock.as_ref().map(|l| l.lock().expect("provider lock"));
        self.inner.embed(text)
    }
}

struct GuardedBackend<'a> {
    inner: &'a dyn SynonymBackend,
    lock: Option<std::sync::Mutex<()>>,
}

impl<'a> GuardedBackend<'a> {
    fn new(inner: &'a dyn SynonymBackend) -> Self {
        let lock = (!inner.is_reentrant()).then(|| std::sync::Mutex::new(()));
        Self { inner, lock }
    }
}

impl SynonymBackend for GuardedBackend<'_> {
    fn propose(
        &self,
        token: &str,
        context: &[String],
        max: usize,
    ) -> Result<Vec<String>, super::BackendFailure> {
        let _serialize = self.lock.as_ref().map(|l| l.lock().expect("backend lock"));
        self.inner.propose(token, context, max)
    }
}

/// Tokenizes `text` and resolves every token in order.
pub fn resolve_sentence(
    text: &str,
    kb: &KnowledgeBase,
    provider: &dyn EmbeddingProvider,
    backend: &dyn SynonymBackend,
    cfg: &CascadeConfig,
) -> Result<SymbolPoseSequence, CvrError> {
    let mode = match cfg.tokenizer {
        TokenizerKind::Char => TokenizeMode::Char,
        TokenizerKind::Lexicon => TokenizeMode::Lexicon(kb),
    };
    let tokens = tokenize(text, mode);

    let mut items = Vec::with_capacity(tokens.len());
    let mut traces = Vec::with_capacity(tokens.len());
    for token in &tokens {
        let (resolved, trace) = resolve_token(token, &tokens, kb, provider, backend, cfg)?;
        match resolved {
            Some(item) => items.push(item),
            None => {
                if cfg.on_unresolved == UnresolvedPolicy::Error {
                    return Err(CvrError::UnresolvedToken {
                        token: token.clone(),
                    });
                }
            }
        }
        traces.push(trace);
    }
    Ok(SymbolPoseSequence { items, traces })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cvr::{BackendFailure, StaticEmbedder, SynonymListBackend};
    use crate::kb::test_support::entry;
    use std::sync::atomic::{AtomicUsize, Ordering};

    struct FixedBackend(Vec<String>);

    impl SynonymBackend for FixedBackend {
        fn propose(
            &self,
            _token: &str,
            _context: &[String],
            max: usize,
        ) -> Result<Vec<String>, BackendFailure> {
            Ok(self.0.iter().take(max).cloned().collect())
        }
    }

    /// Provider that counts calls, for short-circuit checks.
    struct CountingProvider<'a> {
        inner: &'a dyn EmbeddingProvider,
        calls: AtomicUsize,
    }

    impl EmbeddingProvider for CountingProvider<'_> {
        fn embed(&self, text: &str) -> Result<Vec<f64>, BackendFailure> {
            self.calls.fetch_add(1, Ordering::SeqCst);
            self.inner.embed(text)
        }
    }

    fn demo_kb() -> KnowledgeBase {
        let mut kb = KnowledgeBase::new(2);
        kb.push(entry("你好", Some(vec![1.0, 0.0])));
        kb.push(entry("世界", Some(vec![0.0, 1.0])));
        kb.push(entry("再见", Some(vec![0.6, 0.8])).with_synonyms(vec!["拜拜".to_string()]));
        kb
    }

    fn cfg() -> CascadeConfig {
        CascadeConfig {
            tokenizer: TokenizerKind::Lexicon,
            ..CascadeConfig::default()
        }
    }

    #[test]
    fn direct_hit_never_calls_provider_or_backend() {
        let kb = demo_kb();
        let inner = StaticEmbedder::default();
        let provider = CountingProvider {
            inner: &inner,
            calls: AtomicUsize::new(0),
        };
        let backend = FixedBackend(vec!["should not matter".to_string()]);
        let (resolved, trace) =
            resolve_token("你好", &[], &kb, &provider, &backend, &cfg()).unwrap();
        assert_eq!(resolved.unwrap().0, "你好");
        assert_eq!(trace.level, ResolutionLevel::Direct);
        assert_eq!(trace.score, None);
        assert_eq!(trace.candidates_examined, 0);
        assert_eq!(provider.calls.load(Ordering::SeqCst), 0);
    }

    #[test]
    fn embedding_hit_matches_brute_force_argmax() {
        let kb = demo_kb();
        let provider = StaticEmbedder::new([("朋友", vec![0.95, 0.05])]);
        let backend = FixedBackend(Vec::new());
        let (resolved, trace) =
            resolve_token("朋友", &[], &kb, &provider, &backend, &cfg()).unwrap();
        // brute force: cos with 你好 is highest of the three
        assert_eq!(resolved.unwrap().0, "你好");
        assert_eq!(trace.level, ResolutionLevel::Embedding);
        assert!(trace.score.unwrap() >= 0.7);
        assert_eq!(trace.candidates_examined, kb.len());
    }

    #[test]
    fn synonym_level_takes_first_kb_valid_candidate() {
        let kb = demo_kb();
        // Far from everything: best score is below the 0.7 threshold.
        let provider = StaticEmbedder::new([("拜拜", vec![-1.0, 0.0])]);
        let backend = SynonymListBackend::new(&kb);
        let (resolved, trace) =
            resolve_token("拜拜", &[], &kb, &provider, &backend, &cfg()).unwrap();
        assert_eq!(resolved.unwrap().0, "再见");
        assert_eq!(trace.level, ResolutionLevel::Synonym);
        assert_eq!(trace.score, None);
    }

    #[test]
    fn unresolved_trace_has_no_symbol() {
        let kb = demo_kb();
        let provider = StaticEmbedder::new([("哦", vec![-1.0, 0.0])]);
        let backend = FixedBackend(vec!["不在库".to_string()]);
        let (resolved, trace) =
            resolve_token("哦", &[], &kb, &provider, &backend, &cfg()).unwrap();
        assert!(resolved.is_none());
        assert_eq!(trace.level, ResolutionLevel::Unresolved);
        assert_eq!(trace.chosen_symbol, None);
        assert_eq!(trace.candidates_examined, kb.len() + 1);
    }

    #[test]
    fn backend_failure_carries_the_token() {
        struct FailingBackend;
        impl SynonymBackend for FailingBackend {
            fn propose(
                &self,
                _: &str,
                _: &[String],
                _: usize,
            ) -> Result<Vec<String>, BackendFailure> {
                Err(BackendFailure("offline".to_string()))
            }
        }
        let kb = demo_kb();
        let provider = StaticEmbedder::new([("哦", vec![-1.0, 0.0])]);
        let err = resolve_token("哦", &[], &kb, &provider, &FailingBackend, &cfg()).unwrap_err();
        assert!(matches!(err, CvrError::Backend { token, .. } if token == "哦"));
    }

    #[test]
    fn sentence_of_direct_hits_preserves_order() {
        let kb = demo_kb();
        let provider = StaticEmbedder::default();
        let backend = FixedBackend(Vec::new());
        let out = resolve_sentence("你好世界", &kb, &provider, &backend, &cfg()).unwrap();
        assert_eq!(out.items.len(), 2);
        assert_eq!(out.items[0].0, "你好");
        assert_eq!(out.items[1].0, "世界");
        assert_eq!(out.traces.len(), 2);
        assert!(out
            .traces
            .iter()
            .all(|t| t.level == ResolutionLevel::Direct));
    }

    #[test]
    fn skip_policy_omits_unresolved_but_keeps_trace() {
        let kb = demo_kb();
        let provider = StaticEmbedder::new([("哦", vec![-1.0, 0.0])]);
        let backend = FixedBackend(Vec::new());
        let out = resolve_sentence("你好哦", &kb, &provider, &backend, &cfg()).unwrap();
        assert_eq!(out.items.len(), 1);
        assert_eq!(out.traces.len(), 2);
        assert_eq!(out.traces[1].level, ResolutionLevel::Unresolved);
    }

    #[test]
    fn error_policy_fails_on_unresolved() {
        let kb = demo_kb();
        let provider = StaticEmbedder::new([("哦", vec![-1.0, 0.0])]);
        let backend = FixedBackend(Vec::new());
        let strict = CascadeConfig {
            on_unresolved: UnresolvedPolicy::Error,
            ..cfg()
        };
        let err = resolve_sentence("你好哦", &kb, &provider, &backend, &strict).unwrap_err();
        assert!(matches!(err, CvrError::UnresolvedToken { token } if token == "哦"));
    }

    #[test]
    fn empty_sentence_is_empty_output() {
        let kb = demo_kb();
        let provider = StaticEmbedder::default();
        let backend = FixedBackend(Vec::new());
        let out = resolve_sentence("", &kb, &provider, &backend, &cfg()).unwrap();
        assert!(out.items.is_empty());
        assert!(out.traces.is_empty());
    }

    #[test]
    fn batch_resolution_preserves_order() {
        let kb = demo_kb();
        let provider = StaticEmbedder::default();
        let backend = FixedBackend(Vec::new());
        let texts = ["你好", "世界", "再见"];
        let out = resolve_sentences(&texts, &kb, &provider, &backend, &cfg()).unwrap();
        assert_eq!(out.len(), 3);
        assert_eq!(out[0].items[0].0, "你好");
        assert_eq!(out[1].items[0].0, "世界");
        assert_eq!(out[2].items[0].0, "再见");
    }

    #[test]
    fn non_reentrant_backends_never_see_overlapping_calls() {
        use std::sync::atomic::{AtomicBool, AtomicUsize, Ordering};

        struct SlowNonReentrant {
            in_flight: AtomicBool,
            overlaps: AtomicUsize,
        }

        impl EmbeddingProvider for SlowNonReentrant {
            fn embed(&self, _text: &str) -> Result<Vec<f64>, BackendFailure> {
                if self.in_flight.swap(true, Ordering::SeqCst) {
                    self.overlaps.fetch_add(1, Ordering::SeqCst);
                }
                std::thread::sleep(std::time::Duration::from_micros(200));
                self.in_flight.store(false, Ordering::SeqCst);
                Ok(vec![1.0, 0.0])
            }

            fn is_reentrant(&self) -> bool {
                false
            }
        }

        let kb = demo_kb();
        let provider = SlowNonReentrant {
            in_flight: AtomicBool::new(false),
            overlaps: AtomicUsize::new(0),
        };
        let backend = FixedBackend(Vec::new());
        // OOV single chars force a provider call per sentence.
        let texts: Vec<String> = (0..32).map(|_| "哦".to_string()).collect();
        let pool = rayon::ThreadPoolBuilder::new().num_threads(8).build().unwrap();
        let out = pool
            .install(|| resolve_sentences(&texts, &kb, &provider, &backend, &cfg()))
            .unwrap();
        assert_eq!(out.len(), 32);
        assert_eq!(provider.overlaps.load(Ordering::SeqCst), 0);
    }
}
