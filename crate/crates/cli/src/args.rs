//! Command-line surface. Every per-command argument struct doubles as the
//! matching config-file table, so flags and TOML keys share one name.

use std::collections::BTreeMap;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use eumix::selection::DatasetConfig;
use serde::{Deserialize, Serialize};

#[derive(Debug, Parser)]
#[command(
    name = "eumix",
    version,
    about = "Multilingual LLM training-data engineering toolkit"
)]
pub struct Cli {
    /// TOML file with a table per subcommand, e.g. `[tok.train]`. Flags win.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,

    /// Seed recorded in every output (default: config `seed`, else 0).
    #[arg(long, global = true)]
    pub seed: Option<u64>,

    /// Worker threads (default: available parallelism).
    #[arg(long, global = true)]
    pub workers: Option<usize>,

    /// Machine-readable JSON reports instead of CSV/Markdown.
    #[arg(long, global = true)]
    pub json: bool,

    #[arg(short, long, global = true)]
    pub verbose: bool,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Corpus statistics and table validation.
    #[command(subcommand)]
    Corpus(CorpusCommand),
    /// Train or apply a byte-level BPE tokenizer.
    #[command(subcommand)]
    Tok(TokCommand),
    /// Tokens-per-word comparison over a parallel corpus.
    Fertility(FertilityArgs),
    /// Plan and execute a language mixture.
    #[command(subcommand)]
    Mix(MixCommand),
    /// Score, diversity-filter and oversample instruction data.
    Select(SelectArgs),
    /// Pack instruction samples into fixed-length sequences.
    Pack(PackArgs),
    /// Learning-rate schedules.
    #[command(subcommand)]
    Schedule(ScheduleCommand),
    /// Compare ablation runs at equal compute.
    #[command(subcommand)]
    Ablate(AblateCommand),
    /// Toxicity and benchmark aggregation.
    #[command(subcommand)]
    Metrics(MetricsCommand),
}

#[derive(Debug, Subcommand)]
pub enum CorpusCommand {
    /// Per-language curated/web token counts from a JSONL corpus.
    Stats(CorpusStatsArgs),
    /// Recompute a declared statistics table and report mismatches (exit 1 if any).
    Validate(CorpusValidateArgs),
}

#[derive(Debug, Subcommand)]
pub enum TokCommand {
    Train(TokTrainArgs),
    /// Encode each line of a text file to token ids (JSONL).
    Encode(TokEncodeArgs),
}

#[derive(Debug, Subcommand)]
pub enum MixCommand {
    Plan(MixPlanArgs),
    Run(MixRunArgs),
}

#[derive(Debug, Subcommand)]
pub enum ScheduleCommand {
    /// Sample a schedule at evenly spaced steps (CSV).
    Preview(SchedulePreviewArgs),
}

#[derive(Debug, Subcommand)]
pub enum AblateCommand {
    /// Rescale run logs to the baseline's step axis and probe losses.
    Normalize(AblateNormalizeArgs),
    /// Score evaluated runs against the baseline.
    Score(AblateScoreArgs),
}

#[derive(Debug, Subcommand)]
pub enum MetricsCommand {
    /// EP / A toxicity summary per language.
    Tox(MetricsToxArgs),
    /// Subset averages and robustness statistics from an eval matrix.
    Eval(MetricsEvalArgs),
}

#[derive(Debug, Default, Args, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CorpusStatsArgs {
    /// JSONL corpus.
    #[arg(long)]
    pub input: Option<PathBuf>,
    /// Count tokens with this vocabulary instead of whitespace words.
    #[arg(long)]
    pub vocab: Option<PathBuf>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Default, Args, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CorpusValidateArgs {
    /// Statistics CSV with a `Total` row.
    #[arg(long)]
    pub table: Option<PathBuf>,
    /// `tokens` or `words`.
    #[arg(long)]
    pub unit: Option<String>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Default, Args, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TokTrainArgs {
    #[arg(long)]
    pub input: Option<PathBuf>,
    #[arg(long)]
    pub vocab_size: Option<usize>,
    /// Documents sampled per language.
    #[arg(long)]
    pub quota: Option<usize>,
    /// Comma-separated language codes (default: all in the corpus).
    #[arg(long, value_delimiter = ',')]
    pub languages: Option<Vec<String>>,
    #[arg(long)]
    pub special_count: Option<usize>,
    /// `whitespace_split` or `none`.
    #[arg(long)]
    pub pretokenize: Option<String>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Default, Args, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TokEncodeArgs {
    #[arg(long)]
    pub vocab: Option<PathBuf>,
    /// Text file, one sequence per line.
    #[arg(long)]
    pub input: Option<PathBuf>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Default, Args, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FertilityArgs {
    /// Directory of `<lang>.txt` files, one aligned sentence per line.
    #[arg(long)]
    pub parallel: Option<PathBuf>,
    /// `name=vocab.json`, repeatable.
    #[arg(long = "tokenizer")]
    pub tokenizers: Option<Vec<String>>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Default, Args, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MixPlanArgs {
    /// Statistics CSV whose per-language totals give availability.
    #[arg(long)]
    pub availability: Option<PathBuf>,
    /// Inline `de=30,fi=70` or a `lang,share` CSV path.
    #[arg(long)]
    pub shares: Option<String>,
    #[arg(long)]
    pub budget: Option<u64>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Default, Args, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MixRunArgs {
    #[arg(long)]
    pub plan: Option<PathBuf>,
    #[arg(long)]
    pub corpus: Option<PathBuf>,
    #[arg(long)]
    pub vocab: Option<PathBuf>,
    /// Mixed corpus (JSONL).
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Per-language outcome CSV.
    #[arg(long)]
    pub report: Option<PathBuf>,
}

#[derive(Debug, Default, Args, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SelectArgs {
    #[arg(long)]
    pub input: Option<PathBuf>,
    #[arg(long)]
    pub quality_weight: Option<f64>,
    #[arg(long)]
    pub complexity_weight: Option<f64>,
    /// Default per-dataset sample size (omit to keep all).
    #[arg(long)]
    pub sample_size: Option<usize>,
    /// Default cosine-distance threshold.
    #[arg(long)]
    pub min_distance: Option<f64>,
    /// Default oversampling factor.
    #[arg(long)]
    pub oversample: Option<u32>,
    /// Per-dataset overrides (config file only).
    #[arg(skip)]
    pub datasets: Option<BTreeMap<String, DatasetConfig>>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub report: Option<PathBuf>,
}

#[derive(Debug, Default, Args, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PackArgs {
    /// Instruction samples (JSONL), e.g. the output of `select`.
    #[arg(long)]
    pub input: Option<PathBuf>,
    /// Tokenizer (default: bytes only).
    #[arg(long)]
    pub vocab: Option<PathBuf>,
    #[arg(long)]
    pub capacity: Option<usize>,
    /// `first_fit_decreasing` or `sequential`.
    #[arg(long)]
    pub policy: Option<String>,
    /// Clip over-long responses instead of failing.
    #[arg(long, num_args = 0..=1, default_missing_value = "true")]
    pub truncate_response: Option<bool>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Per-pack utilization CSV.
    #[arg(long)]
    pub report: Option<PathBuf>,
}

#[derive(Debug, Default, Args, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SchedulePreviewArgs {
    /// `cosine-warmup`, `continue-decay`, `full-rewarmup`, `partial-rewarmup`.
    #[arg(long)]
    pub variant: Option<String>,
    /// Number of sampled steps, endpoints included.
    #[arg(long)]
    pub resolution: Option<usize>,
    #[arg(long)]
    pub lr_start: Option<f64>,
    #[arg(long)]
    pub lr_max: Option<f64>,
    #[arg(long)]
    pub lr_min: Option<f64>,
    #[arg(long)]
    pub warmup_steps: Option<u64>,
    #[arg(long)]
    pub total_steps: Option<u64>,
    #[arg(long)]
    pub handoff_lr: Option<f64>,
    #[arg(long)]
    pub continuation_steps: Option<u64>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Default, Args, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AblateNormalizeArgs {
    /// Run logs (`step,loss` CSV with a `.json` sidecar) or directories of them.
    #[arg(long = "run")]
    pub runs: Option<Vec<PathBuf>>,
    #[arg(long)]
    pub baseline: Option<String>,
    /// Baseline-equivalent steps at which to read every curve.
    #[arg(long, value_delimiter = ',')]
    pub probes: Option<Vec<f64>>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Full normalized curves (CSV).
    #[arg(long)]
    pub curves: Option<PathBuf>,
}

#[derive(Debug, Default, Args, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AblateScoreArgs {
    /// `run,arc_easy,hellaswag,lambada[,truncated]` CSV.
    #[arg(long)]
    pub evals: Option<PathBuf>,
    #[arg(long)]
    pub baseline: Option<String>,
    /// `md` or `csv`.
    #[arg(long)]
    pub format: Option<String>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Default, Args, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MetricsToxArgs {
    #[arg(long)]
    pub input: Option<PathBuf>,
    #[arg(long)]
    pub threshold: Option<f64>,
    /// Weight languages by prompt count in the aggregate row.
    #[arg(long, num_args = 0..=1, default_missing_value = "true")]
    pub prompt_weighted: Option<bool>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Default, Args, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MetricsEvalArgs {
    /// `model,language,task,accuracy` CSV.
    #[arg(long)]
    pub matrix: Option<PathBuf>,
    /// `eu21`, `top6`, `exclusive15`, `common10` (repeatable; default all).
    #[arg(long = "subset", value_delimiter = ',')]
    pub subsets: Option<Vec<String>>,
    /// Default: every model in the matrix.
    #[arg(long)]
    pub model: Option<String>,
    /// Emit five-number summaries per task instead of means.
    #[arg(long, num_args = 0..=1, default_missing_value = "true")]
    pub robustness: Option<bool>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}
