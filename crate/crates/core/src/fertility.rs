//! Tokenizer fertility: tokens emitted per whitespace-delimited word,
//! measured as a ratio of sums over a sentence-aligned parallel corpus.

use std::collections::{BTreeMap, HashSet};
use std::io::Write;
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::corpus::TokenCounter;
use crate::error::{Error, Result};
use crate::lang::LanguageTag;

/// Number of maximal non-whitespace runs.
pub fn count_words(text: &str) -> u64 {
    text.split_whitespace().count() as u64
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Fertility {
    pub tokens: u64,
    pub words: u64,
    pub ratio: f64,
}

/// `T = Σ encode lengths`, `W = Σ word counts`, `F = T / W`.
pub fn fertility<S: AsRef<str>>(tokenizer: &dyn TokenCounter, texts: &[S]) -> Result<Fertility> {
    let (tokens, words) = texts.iter().fold((0u64, 0u64), |(t, w), text| {
        let text = text.as_ref();
        (t + tokenizer.count_tokens(text), w + count_words(text))
    });
    if words == 0 {
        return Err(Error::NoWords);
    }
    Ok(Fertility {
        tokens,
        words,
        ratio: tokens as f64 / words as f64,
    })
}

/// Sentence-aligned texts: line `i` carries the same content in every
/// language.
#[derive(Clone, Debug, PartialEq)]
pub struct ParallelCorpus {
    sentences: BTreeMap<LanguageTag, Vec<String>>,
    sentence_count: usize,
}

impl ParallelCorpus {
    pub fn new(sentences: BTreeMap<LanguageTag, Vec<String>>) -> Result<Self> {
        let mut counts = sentences.iter().map(|(l, s)| (*l, s.len()));
        let Some((_, sentence_count)) = counts.next() else {
            return Err(Error::ParallelCorpus("no languages".into()));
        };
        if let Some((lang, n)) = counts.find(|(_, n)| *n != sentence_count) {
            return Err(Error::ParallelCorpus(format!(
                "{lang} has {n} sentences, expected {sentence_count}"
            )));
        }
        Ok(ParallelCorpus {
            sentences,
            sentence_count,
        })
    }

    /// Load `<lang>.txt` files (one sentence per line) from `dir`. Files
    /// whose stem is not a language code are ignored.
    pub fn from_dir(dir: impl AsRef<Path>) -> Result<Self> {
        let dir = dir.as_ref();
        let mut sentences = BTreeMap::new();
        let entries = std::fs::read_dir(dir).map_err(|e| Error::io(dir, e))?;
        for entry in entries {
            let path = entry.map_err(|e| Error::io(dir, e))?.path();
            if path.extension().and_then(|e| e.to_str()) != Some("txt") {
                continue;
            }
            let Some(lang) = path
                .file_stem()
                .and_then(|s| s.to_str())
                .and_then(|s| s.parse::<LanguageTag>().ok())
            else {
                continue;
            };
            let text = std::fs::read_to_string(&path).map_err(|e| Error::io(&path, e))?;
            sentences.insert(lang, text.lines().map(str::to_owned).collect());
        }
        ParallelCorpus::new(sentences)
    }

    pub fn sentence_count(&self) -> usize {
        self.sentence_count
    }

    pub fn languages(&self) -> impl Iterator<Item = LanguageTag> + '_ {
        self.sentences.keys().copied()
    }

    pub fn sentences(&self, lang: LanguageTag) -> Option<&[String]> {
        self.sentences.get(&lang).map(Vec::as_slice)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FertilityRow {
    pub language: LanguageTag,
    pub tokenizer: String,
    #[serde(rename = "T")]
    pub tokens: u64,
    #[serde(rename = "W")]
    pub words: u64,
    #[serde(rename = "F")]
    pub fertility: f64,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct FertilityReport {
    pub rows: Vec<FertilityRow>,
}

impl FertilityReport {
    pub fn get(&self, language: LanguageTag, tokenizer: &str) -> Option<&FertilityRow> {
        self.rows
            .iter()
            .find(|r| r.language == language && r.tokenizer == tokenizer)
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut writer = csv::Writer::from_writer(out);
        writer.write_record(["language", "tokenizer", "T", "W", "F"])?;
        for row in &self.rows {
            writer.write_record([
                row.language.to_string(),
                row.tokenizer.clone(),
                row.tokens.to_string(),
                row.words.to_string(),
                format!("{:.6}", row.fertility),
            ])?;
        }
        writer.flush().map_err(|e| Error::io("<output>", e))?;
        Ok(())
    }
}

/// One row per (language, tokenizer), language-major, tokenizers in the
/// order given. Languages are measured in parallel.
pub fn compare_tokenizers(
    tokenizers: &[(&str, &dyn TokenCounter)],
    corpus: &ParallelCorpus,
) -> Result<FertilityReport> {
    let mut seen = HashSet::new();
    for (name, _) in tokenizers {
        if !seen.insert(*name) {
            return Err(Error::DuplicateTokenizer(name.to_string()));
        }
    }
    let langs: Vec<LanguageTag> = corpus.languages().collect();
    let per_lang: Vec<Vec<FertilityRow>> = langs
        .par_iter()
        .map(|&lang| {
            let sentences = corpus.sentences(lang).unwrap_or(&[]);
            tokenizers
                .iter()
                .map(|(name, tok)| {
                    let f = fertility(*tok, sentences)?;
                    Ok(FertilityRow {
                        language: lang,
                        tokenizer: name.to_string(),
                        tokens: f.tokens,
                        words: f.words,
                        fertility: f.ratio,
                    })
                })
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<_>>()?;
    Ok(FertilityReport {
        rows: per_lang.into_iter().flatten().collect(),
    })
}
