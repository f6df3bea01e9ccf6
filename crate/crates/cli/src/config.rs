//! Optional TOML configuration. Precedence everywhere is
//! flag > config file > built-in default; paths are always flags.

use std::path::Path;

use serde::Deserialize;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("unknown config key `{0}`")]
    UnknownKey(String),
    #[error("wrong type for config key `{key}`: {message}")]
    TypeError { key: String, message: String },
    #[error("cannot read config file: {0}")]
    Io(#[from] std::io::Error),
    #[error("config parse error: {0}")]
    Parse(String),
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub seed: Option<u64>,
    pub threads: Option<usize>,
    #[serde(default)]
    pub kb: KbSection,
    #[serde(default)]
    pub resolve: ResolveSection,
    #[serde(default)]
    pub perturb: PerturbSection,
    #[serde(default)]
    pub loss: LossSection,
    #[serde(default)]
    pub corrupt: CorruptSection,
    #[serde(default)]
    pub eval: EvalSection,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KbSection {
    pub embedding_dim: Option<usize>,
    pub embed: Option<String>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ResolveSection {
    pub accept_threshold: Option<f64>,
    pub max_synonyms: Option<usize>,
    pub tokenizer: Option<String>,
    pub on_unresolved: Option<String>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PerturbSection {
    pub theta: Option<f64>,
    pub radius: Option<f64>,
    pub w_large: Option<f64>,
    pub w_small: Option<f64>,
    pub ops_large: Option<Vec<String>>,
    pub ops_small: Option<Vec<String>>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LossSection {
    pub w_self: Option<f64>,
    pub w_lm_video: Option<f64>,
    pub w_lm_t: Option<f64>,
    pub w_ce: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CorruptSection {
    pub p_shuffle: Option<f64>,
    pub p_delete: Option<f64>,
    pub p_substitute: Option<f64>,
    pub p_insert: Option<f64>,
    pub shuffle_window: Option<usize>,
    pub reps: Option<usize>,
    pub allow_empty: Option<bool>,
    pub tokenizer: Option<String>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EvalSection {
    pub tokenizer: Option<String>,
    pub smoothing: Option<String>,
}

/// Dotted key (`table.key`) owning the source position `offset`.
fn key_at(source: &str, offset: usize) -> Option<String> {
    let upto = &source[..offset.min(source.len())];
    let line_start = upto.rfind('\n').map_or(0, |i| i + 1);
    let line = source[line_start..].lines().next()?;
    let key = line.split('=').next()?.trim();
    if key.is_empty() {
        return None;
    }
    let table = upto
        .lines()
        .filter_map(|l| {
            let t = l.trim();
            t.strip_prefix('[')?.strip_suffix(']').map(str::to_string)
        })
        .next_back();
    Some(match table {
        Some(table) => format!("{table}.{key}"),
        None => key.to_string(),
    })
}

fn classify(source: &str, error: toml::de::Error) -> ConfigError {
    let message = error.to_string();
    if message.contains("unknown field") {
        let key = message
            .find("unknown field")
            .and_then(|at| {
                let rest = &message[at..];
                let start = rest.find('`')? + 1;
                let end = start + rest[start..].find('`')?;
                Some(rest[start..end].to_string())
            });
        if let Some(key) = key {
            return ConfigError::UnknownKey(key);
        }
    }
    if message.contains("invalid type") {
        let key = error
            .span()
            .and_then(|span| key_at(source, span.start))
            .unwrap_or_else(|| "<unknown>".to_string());
        let detail = message
            .lines()
            .find(|l| l.contains("invalid type"))
            .unwrap_or(&message)
            .to_string();
        return ConfigError::TypeError { key, message: detail };
    }
    ConfigError::Parse(message)
}

/// Loads the config file, or the all-defaults config when no path is given.
pub fn load_config(path: Option<&Path>) -> Result<FileConfig, ConfigError> {
    match path {
        None => Ok(FileConfig::default()),
        Some(path) => {
            let text = std::fs::read_to_string(path)?;
            toml::from_str(&text).map_err(|e| classify(&text, e))
        }
    }
}

/// flag > config > default.
pub fn pick<T>(flag: Option<T>, file: Option<T>, default: T) -> T {
    flag.or(file).unwrap_or(default)
}
