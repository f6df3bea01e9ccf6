//! signpipe: one binary for every pipeline stage, with reproducible seeds,
//! TOML config files, and run manifests.

mod commands;
mod config;
mod manifest;

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::anyhow;
use clap::{Args, Parser, Subcommand, ValueEnum};

use signpipe_core::cvr::{TokenizerKind, UnresolvedPolicy};
use signpipe_core::distill::LossWeights;
use signpipe_core::metrics::{Smoothing, Tokenizer};
use signpipe_core::perturb::{PerturbConfig as CorePerturbConfig, PerturbOp};

use commands::{corrupt, eval, kb, loss, perturb, resolve, split, Ctx, ResolvedCommand};
use config::{load_config, pick, FileConfig};

#[derive(Parser)]
#[command(
    name = "signpipe",
    version,
    about = "Sign-language dataset toolkit: gloss KBs, cascade resolution, clip perturbation, loss arithmetic, corruption pairs, and evaluation metrics"
)]
struct Cli {
    /// TOML config file; flags override file values, defaults fill the rest
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Root seed for all randomness
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads for batch stages (results are schedule-independent)
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Emit JSON on stdout, or write the JSON report to PATH when given
    #[arg(long, global = true, value_name = "PATH", num_args = 0..=1, default_missing_value = "-")]
    json: Option<String>,
    /// Suppress progress notes on stderr
    #[arg(long, global = true)]
    quiet: bool,
    #[command(subcommand)]
    command: TopCommand,
}

#[derive(Subcommand)]
enum TopCommand {
    /// Build or validate a gloss knowledge base
    #[command(subcommand)]
    Kb(KbCommand),
    /// Partition an id list into train/dev/test (80/10/10)
    Split(SplitArgs),
    /// Resolve sentences to symbol-pose sequences through the cascade
    Resolve(ResolveArgs),
    /// Apply landmark-weighted perturbations to a clip
    Perturb(PerturbArgs),
    /// Compute distillation losses over distribution files
    Loss(LossArgs),
    /// Synthesize corrupted/clean sentence pairs
    Corrupt(CorruptArgs),
    /// Score hypotheses against references (BLEU/ROUGE-L/CER)
    Eval(EvalArgs),
    /// Re-execute a run from its manifest
    Rerun(RerunArgs),
}

#[derive(Subcommand)]
enum KbCommand {
    /// Assemble a KB file from entry records (JSONL, no header line)
    Build(KbBuildArgs),
    /// Check every KB invariant and report violations
    Validate(KbValidateArgs),
}

#[derive(Args)]
struct KbBuildArgs {
    /// Entry records, one JSON object per line
    #[arg(long)]
    input: PathBuf,
    #[arg(long)]
    output: PathBuf,
    /// Embedding dimension declared in the KB header
    #[arg(long)]
    embedding_dim: Option<usize>,
    /// Fill missing embeddings: none | hashed
    #[arg(long, value_enum)]
    embed: Option<EmbedArg>,
    #[arg(long)]
    manifest: Option<PathBuf>,
}

#[derive(Args)]
struct KbValidateArgs {
    #[arg(long)]
    kb: PathBuf,
}

#[derive(Args)]
struct SplitArgs {
    /// Id list, one per line
    #[arg(long, visible_alias = "n-from")]
    from: PathBuf,
    #[arg(long)]
    output: PathBuf,
    #[arg(long)]
    manifest: Option<PathBuf>,
}

#[derive(Args)]
struct ResolveArgs {
    #[arg(long)]
    kb: PathBuf,
    /// Sentences, one per line
    #[arg(long)]
    input: PathBuf,
    #[arg(long)]
    output: PathBuf,
    /// Minimum level-2 cosine similarity to accept
    #[arg(long)]
    accept_threshold: Option<f64>,
    #[arg(long)]
    max_synonyms: Option<usize>,
    #[arg(long, value_enum)]
    tokenizer: Option<ResolveTokenizerArg>,
    #[arg(long, value_enum)]
    on_unresolved: Option<OnUnresolvedArg>,
    #[arg(long)]
    manifest: Option<PathBuf>,
}

#[derive(Args)]
struct PerturbArgs {
    /// SPC1 clip file
    #[arg(long)]
    clip: PathBuf,
    /// Landmarks JSONL aligned with the clip frames
    #[arg(long)]
    landmarks: PathBuf,
    /// Perturbed SPC1 output
    #[arg(long)]
    output: PathBuf,
    /// Metadata JSON path (default <output>.meta.json)
    #[arg(long)]
    meta: Option<PathBuf>,
    /// Speed threshold in pixels/frame
    #[arg(long)]
    theta: Option<f64>,
    /// Mask radius in pixels
    #[arg(long)]
    radius: Option<f64>,
    #[arg(long)]
    w_large: Option<f64>,
    #[arg(long)]
    w_small: Option<f64>,
    /// Ops inside the fast-motion mask, comma-separated
    /// (pixel_shuffle, random_pixel_replace[:p], block_occlude:HxW,
    /// gaussian_noise:sigma, temporal_shuffle)
    #[arg(long, value_delimiter = ',')]
    ops_large: Option<Vec<String>>,
    /// Ops inside the mask complement, comma-separated
    #[arg(long, value_delimiter = ',')]
    ops_small: Option<Vec<String>>,
    #[arg(long)]
    manifest: Option<PathBuf>,
}

#[derive(Args)]
struct LossArgs {
    /// Distillation pair NAME:P.jsonl,Q.jsonl with NAME in
    /// {self, lm-video, lm-t}; repeatable
    #[arg(long = "pairs", value_name = "NAME:P,Q")]
    pairs: Vec<String>,
    /// Cross-entropy inputs PRED.jsonl,TARGETS.txt
    #[arg(long, value_name = "PRED,TARGETS")]
    ce: Option<String>,
    #[arg(long)]
    w_self: Option<f64>,
    #[arg(long)]
    w_lm_video: Option<f64>,
    #[arg(long)]
    w_lm_t: Option<f64>,
    #[arg(long)]
    w_ce: Option<f64>,
    /// Breakdown JSON destination (default: stdout)
    #[arg(long)]
    output: Option<PathBuf>,
    #[arg(long)]
    manifest: Option<PathBuf>,
}

#[derive(Args)]
struct CorruptArgs {
    /// Sentences, one per line
    #[arg(long)]
    input: PathBuf,
    #[arg(long)]
    output: PathBuf,
    #[arg(long)]
    p_shuffle: Option<f64>,
    #[arg(long)]
    p_delete: Option<f64>,
    #[arg(long)]
    p_substitute: Option<f64>,
    #[arg(long)]
    p_insert: Option<f64>,
    #[arg(long)]
    shuffle_window: Option<usize>,
    /// Corruption records per sentence
    #[arg(long)]
    reps: Option<usize>,
    /// Substitution/insertion pool file (default: tokens of the input)
    #[arg(long)]
    vocab: Option<PathBuf>,
    #[arg(long, value_enum)]
    tokenizer: Option<CorruptTokenizerArg>,
    /// Allow deletions to empty a sentence
    #[arg(long)]
    allow_empty: bool,
    #[arg(long)]
    manifest: Option<PathBuf>,
}

#[derive(Args)]
struct EvalArgs {
    #[arg(long)]
    hyp: PathBuf,
    #[arg(long = "ref")]
    reference: PathBuf,
    #[arg(long, value_enum)]
    tokenizer: Option<EvalTokenizerArg>,
    #[arg(long, value_enum)]
    smoothing: Option<SmoothingArg>,
    #[arg(long)]
    manifest: Option<PathBuf>,
}

#[derive(Args)]
struct RerunArgs {
    /// Manifest written by a previous run
    #[arg(long)]
    manifest: PathBuf,
}

#[derive(Clone, Copy, ValueEnum)]
enum EmbedArg {
    None,
    Hashed,
}

#[derive(Clone, Copy, ValueEnum)]
enum ResolveTokenizerArg {
    Char,
    Lexicon,
}

#[derive(Clone, Copy, ValueEnum)]
enum OnUnresolvedArg {
    Skip,
    Error,
}

#[derive(Clone, Copy, ValueEnum)]
enum CorruptTokenizerArg {
    Space,
    Char,
}

#[derive(Clone, Copy, ValueEnum)]
enum EvalTokenizerArg {
    Char,
    Whitespace,
}

#[derive(Clone, Copy, ValueEnum)]
enum SmoothingArg {
    None,
    AddOne,
}

/// Errors split by exit code: usage problems exit 2, data problems exit 1.
enum CliError {
    Usage(String),
    Data(anyhow::Error),
}

impl From<anyhow::Error> for CliError {
    fn from(error: anyhow::Error) -> Self {
        Self::Data(error)
    }
}

impl From<config::ConfigError> for CliError {
    fn from(error: config::ConfigError) -> Self {
        Self::Usage(error.to_string())
    }
}

fn usage(message: impl Into<String>) -> CliError {
    CliError::Usage(message.into())
}

fn parse_ops(values: &[String], flag: &str) -> Result<Vec<PerturbOp>, CliError> {
    values
        .iter()
        .map(|s| {
            s.parse::<PerturbOp>()
                .map_err(|e| usage(format!("--{flag}: {e}")))
        })
        .collect()
}

fn parse_enum_str<T: Copy>(value: &str, table: &[(&str, T)], key: &str) -> Result<T, CliError> {
    table
        .iter()
        .find(|(name, _)| *name == value)
        .map(|(_, v)| *v)
        .ok_or_else(|| {
            let options: Vec<&str> = table.iter().map(|(n, _)| *n).collect();
            usage(format!(
                "config key {key}: unknown value {value:?}, expected one of {options:?}"
            ))
        })
}

fn resolve_command(
    cli_command: TopCommand,
    file: &FileConfig,
    seed: u64,
    json: &Option<String>,
) -> Result<ResolvedCommand, CliError> {
    let command = match cli_command {
        TopCommand::Kb(KbCommand::Build(args)) => {
            let embedding_dim = args
                .embedding_dim
                .or(file.kb.embedding_dim)
                .ok_or_else(|| usage("kb build needs --embedding-dim (or [kb].embedding_dim)"))?;
            let embed_file = match file.kb.embed.as_deref() {
                None => None,
                Some(value) => Some(parse_enum_str(
                    value,
                    &[("none", EmbedArg::None), ("hashed", EmbedArg::Hashed)],
                    "kb.embed",
                )?),
            };
            let embed = match args.embed.or(embed_file).unwrap_or(EmbedArg::None) {
                EmbedArg::None => kb::EmbedFill::None,
                EmbedArg::Hashed => kb::EmbedFill::Hashed,
            };
            ResolvedCommand::KbBuild(kb::KbBuildConfig {
                input: args.input,
                output: args.output,
                embedding_dim,
                embed,
                manifest: args.manifest,
            })
        }
        TopCommand::Kb(KbCommand::Validate(args)) => {
            ResolvedCommand::KbValidate(kb::KbValidateConfig { kb: args.kb })
        }
        TopCommand::Split(args) => ResolvedCommand::Split(split::SplitConfig {
            from: args.from,
            output: args.output,
            seed,
            manifest: args.manifest,
        }),
        TopCommand::Resolve(args) => {
            let tokenizer_file = match file.resolve.tokenizer.as_deref() {
                None => None,
                Some(v) => Some(parse_enum_str(
                    v,
                    &[
                        ("char", TokenizerKind::Char),
                        ("lexicon", TokenizerKind::Lexicon),
                    ],
                    "resolve.tokenizer",
                )?),
            };
            let on_unresolved_file = match file.resolve.on_unresolved.as_deref() {
                None => None,
                Some(v) => Some(parse_enum_str(
                    v,
                    &[
                        ("skip", UnresolvedPolicy::Skip),
                        ("error", UnresolvedPolicy::Error),
                    ],
                    "resolve.on_unresolved",
                )?),
            };
            ResolvedCommand::Resolve(resolve::ResolveConfig {
                kb: args.kb,
                input: args.input,
                output: args.output,
                accept_threshold: pick(args.accept_threshold, file.resolve.accept_threshold, 0.7),
                max_synonyms: pick(args.max_synonyms, file.resolve.max_synonyms, 8),
                tokenizer: pick(
                    args.tokenizer.map(|t| match t {
                        ResolveTokenizerArg::Char => TokenizerKind::Char,
                        ResolveTokenizerArg::Lexicon => TokenizerKind::Lexicon,
                    }),
                    tokenizer_file,
                    TokenizerKind::Lexicon,
                ),
                on_unresolved: pick(
                    args.on_unresolved.map(|p| match p {
                        OnUnresolvedArg::Skip => UnresolvedPolicy::Skip,
                        OnUnresolvedArg::Error => UnresolvedPolicy::Error,
                    }),
                    on_unresolved_file,
                    UnresolvedPolicy::Skip,
                ),
                manifest: args.manifest,
            })
        }
        TopCommand::Perturb(args) => {
            let defaults = CorePerturbConfig::default();
            let ops_large = match (&args.ops_large, &file.perturb.ops_large) {
                (Some(flag), _) => parse_ops(flag, "ops-large")?,
                (None, Some(cfg)) => parse_ops(cfg, "ops-large")?,
                (None, None) => defaults.ops_large.clone(),
            };
            let ops_small = match (&args.ops_small, &file.perturb.ops_small) {
                (Some(flag), _) => parse_ops(flag, "ops-small")?,
                (None, Some(cfg)) => parse_ops(cfg, "ops-small")?,
                (None, None) => defaults.ops_small.clone(),
            };
            ResolvedCommand::Perturb(perturb::PerturbCommandConfig {
                clip: args.clip,
                landmarks: args.landmarks,
                output: args.output,
                meta: args.meta,
                theta: pick(args.theta, file.perturb.theta, defaults.theta),
                radius: pick(args.radius, file.perturb.radius, defaults.radius),
                w_large: pick(args.w_large, file.perturb.w_large, defaults.w_large),
                w_small: pick(args.w_small, file.perturb.w_small, defaults.w_small),
                ops_large,
                ops_small,
                seed,
                manifest: args.manifest,
            })
        }
        TopCommand::Loss(args) => {
            let mut self_pair = None;
            let mut lm_video_pair = None;
            let mut lm_t_pair = None;
            for spec in &args.pairs {
                let (name, paths) = spec
                    .split_once(':')
                    .ok_or_else(|| usage(format!("--pairs expects NAME:P,Q, got {spec:?}")))?;
                let (p, q) = paths
                    .split_once(',')
                    .ok_or_else(|| usage(format!("--pairs expects two files, got {paths:?}")))?;
                let pair = loss::PairPaths {
                    p: PathBuf::from(p),
                    q: PathBuf::from(q),
                };
                let slot = match name {
                    "self" => &mut self_pair,
                    "lm-video" => &mut lm_video_pair,
                    "lm-t" => &mut lm_t_pair,
                    other => {
                        return Err(usage(format!(
                            "--pairs name must be self, lm-video or lm-t, got {other:?}"
                        )))
                    }
                };
                if slot.is_some() {
                    return Err(usage(format!("--pairs {name} given twice")));
                }
                *slot = Some(pair);
            }
            let ce = match &args.ce {
                None => None,
                Some(spec) => {
                    let (pred, targets) = spec
                        .split_once(',')
                        .ok_or_else(|| usage(format!("--ce expects PRED,TARGETS, got {spec:?}")))?;
                    Some(loss::CePaths {
                        predictions: PathBuf::from(pred),
                        targets: PathBuf::from(targets),
                    })
                }
            };
            ResolvedCommand::Loss(loss::LossCommandConfig {
                self_pair,
                lm_video_pair,
                lm_t_pair,
                ce,
                weights: LossWeights {
                    self_kl: pick(args.w_self, file.loss.w_self, 1.0),
                    lm_video_kl: pick(args.w_lm_video, file.loss.w_lm_video, 1.0),
                    lm_t_kl: pick(args.w_lm_t, file.loss.w_lm_t, 1.0),
                    ce: pick(args.w_ce, file.loss.w_ce, 1.0),
                },
                output: args.output,
                manifest: args.manifest,
            })
        }
        TopCommand::Corrupt(args) => {
            let tokenizer_file = match file.corrupt.tokenizer.as_deref() {
                None => None,
                Some(v) => Some(parse_enum_str(
                    v,
                    &[
                        ("space", corrupt::CorruptTokenizer::Space),
                        ("char", corrupt::CorruptTokenizer::Char),
                    ],
                    "corrupt.tokenizer",
                )?),
            };
            ResolvedCommand::Corrupt(corrupt::CorruptCommandConfig {
                input: args.input,
                output: args.output,
                p_shuffle: pick(args.p_shuffle, file.corrupt.p_shuffle, 0.15),
                p_delete: pick(args.p_delete, file.corrupt.p_delete, 0.15),
                p_substitute: pick(args.p_substitute, file.corrupt.p_substitute, 0.15),
                p_insert: pick(args.p_insert, file.corrupt.p_insert, 0.15),
                shuffle_window: pick(args.shuffle_window, file.corrupt.shuffle_window, 3),
                reps: pick(args.reps, file.corrupt.reps, 1),
                vocab: args.vocab,
                tokenizer: pick(
                    args.tokenizer.map(|t| match t {
                        CorruptTokenizerArg::Space => corrupt::CorruptTokenizer::Space,
                        CorruptTokenizerArg::Char => corrupt::CorruptTokenizer::Char,
                    }),
                    tokenizer_file,
                    corrupt::CorruptTokenizer::Space,
                ),
                allow_empty: args.allow_empty || file.corrupt.allow_empty.unwrap_or(false),
                seed,
                manifest: args.manifest,
            })
        }
        TopCommand::Eval(args) => {
            let tokenizer_file = match file.eval.tokenizer.as_deref() {
                None => None,
                Some(v) => Some(parse_enum_str(
                    v,
                    &[
                        ("char", Tokenizer::Char),
                        ("whitespace", Tokenizer::Whitespace),
                    ],
                    "eval.tokenizer",
                )?),
            };
            let smoothing_file = match file.eval.smoothing.as_deref() {
                None => None,
                Some(v) => Some(parse_enum_str(
                    v,
                    &[("none", Smoothing::None), ("add_one", Smoothing::AddOne)],
                    "eval.smoothing",
                )?),
            };
            let json_out = match json.as_deref() {
                Some(path) if path != "-" => Some(PathBuf::from(path)),
                _ => None,
            };
            ResolvedCommand::Eval(eval::EvalCommandConfig {
                hyp: args.hyp,
                reference: args.reference,
                tokenizer: pick(
                    args.tokenizer.map(|t| match t {
                        EvalTokenizerArg::Char => Tokenizer::Char,
                        EvalTokenizerArg::Whitespace => Tokenizer::Whitespace,
                    }),
                    tokenizer_file,
                    Tokenizer::Char,
                ),
                smoothing: pick(
                    args.smoothing.map(|s| match s {
                        SmoothingArg::None => Smoothing::None,
                        SmoothingArg::AddOne => Smoothing::AddOne,
                    }),
                    smoothing_file,
                    Smoothing::None,
                ),
                json_out,
                manifest: args.manifest,
            })
        }
        TopCommand::Rerun(_) => unreachable!("rerun is dispatched before resolution"),
    };
    Ok(command)
}

fn run(cli: Cli) -> Result<(), CliError> {
    let file = load_config(cli.config.as_deref())?;
    let seed = pick(cli.seed, file.seed, 0);
    if let Some(threads) = cli.threads.or(file.threads) {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global()
            .map_err(|e| CliError::Data(anyhow!("cannot configure thread pool: {e}")))?;
    }
    let ctx = Ctx {
        quiet: cli.quiet,
        json: cli.json.clone(),
    };

    if let TopCommand::Rerun(args) = &cli.command {
        return commands::rerun(&args.manifest, &ctx).map_err(CliError::Data);
    }
    let command = resolve_command(cli.command, &file, seed, &cli.json)?;
    commands::run_command(&command, &ctx).map_err(CliError::Data)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::Usage(message)) => {
            eprintln!("error: {message}");
            ExitCode::from(2)
        }
        Err(CliError::Data(error)) => {
            eprintln!("error: {error:#}");
            ExitCode::from(1)
        }
    }
}
