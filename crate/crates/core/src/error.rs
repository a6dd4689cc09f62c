use std::path::PathBuf;

use crate::lang::LanguageTag;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}:{line}: malformed record: {message}")]
    MalformedRecord {
        path: PathBuf,
        line: usize,
        message: String,
    },

    #[error("CSV error: {0}")]
    Csv(#[from] csv::Error),

    #[error("JSON error: {0}")]
    Json(#[from] serde_json::Error),

    #[error("language {language}: need {quota} documents, found {available} (short by {shortfall})")]
    InsufficientDocuments {
        language: LanguageTag,
        quota: usize,
        available: usize,
        shortfall: usize,
    },

    #[error("vocab size {requested} too small: must exceed {minimum}")]
    VocabTooSmall { requested: usize, minimum: usize },

    #[error("unknown token id {0}")]
    UnknownTokenId(u32),

    #[error("no words in sample")]
    NoWords,

    #[error("duplicate tokenizer name {0:?}")]
    DuplicateTokenizer(String),

    #[error("invalid parallel corpus: {0}")]
    ParallelCorpus(String),

    #[error("target shares sum to {sum:.4}, expected 100 ± 0.05")]
    ShareSum { sum: f64 },

    #[error("language {0} is targeted but has no available tokens")]
    NoAvailability(LanguageTag),

    #[error("corpus has {actual} tokens for {language}, plan declares {declared}")]
    AvailabilityMismatch {
        language: LanguageTag,
        declared: u64,
        actual: u64,
    },

    #[error("preference weights sum to {sum}, expected 1")]
    WeightSum { sum: f64 },

    #[error("sample {0:?} has a zero-norm embedding")]
    ZeroNormEmbedding(String),

    #[error("sample {id:?}: embedding has dimension {found}, expected {expected}")]
    EmbeddingDimension { id: String, expected: usize, found: usize },

    #[error("oversampling factor must be >= 1, got {0}")]
    OversampleFactor(u32),

    #[error("response length is zero: nothing to learn from")]
    EmptyResponse,

    #[error("sample {id:?} has {length} tokens, exceeding capacity {capacity}")]
    SampleTooLong { id: String, length: usize, capacity: usize },

    #[error("step {step} outside schedule range 0..={end}")]
    StepOutOfRange { step: u64, end: u64 },

    #[error("invalid schedule: {0}")]
    InvalidSchedule(String),

    #[error("run {run_id:?}: {message}")]
    InvalidRun { run_id: String, message: String },

    #[error("empty curve for run {0:?}")]
    EmptyCurve(String),

    #[error("invalid score {value} for {context}: must be in [0, 1]")]
    ScoreRange { context: String, value: f64 },

    #[error("missing eval cells for model {model:?}: {}", format_gaps(.gaps))]
    MissingCells {
        model: String,
        gaps: Vec<(LanguageTag, String)>,
    },

    #[error("need at least 5 languages, found {0}")]
    TooFewLanguages(usize),

    #[error("{0}")]
    Invalid(String),
}

fn format_gaps(gaps: &[(LanguageTag, String)]) -> String {
    gaps.iter()
        .map(|(lang, task)| format!("({lang}, {task})"))
        .collect::<Vec<_>>()
        .join(", ")
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
