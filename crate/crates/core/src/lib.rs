//! Data-engineering toolkit for multilingual LLM training.
//!
//! The crate covers the computable parts of a multilingual pretraining and
//! instruction-tuning pipeline:
//!
//! - [`corpus`]: JSONL ingestion and per-language token statistics
//! - [`bpe`]: byte-level BPE training, encoding and decoding
//! - [`fertility`]: tokens-per-word comparison over parallel corpora
//! - [`mixer`]: language mixture planning and seeded up/down-sampling
//! - [`selection`]: preference scoring, diversity filtering, oversampling
//! - [`packer`]: sequence packing with response-only loss masks
//! - [`schedule`]: warmup/cosine learning-rate schedules and continuations
//! - [`ablation`]: throughput-normalized run comparison
//! - [`metrics`]: toxicity EP/A summaries and per-language eval aggregation

pub mod ablation;
pub mod bpe;
pub mod corpus;
pub mod error;
pub mod fertility;
pub mod lang;
pub mod metrics;
pub mod mixer;
pub mod packer;
pub mod schedule;
pub mod selection;
pub mod synth;

pub use error::{Error, Result};
pub use lang::LanguageTag;
