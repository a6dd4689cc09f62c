//! Corpus ingestion and per-language token statistics.
//!
//! Documents arrive as JSONL with fields `id`, `text`, `lang`, `source`.
//! [`compute_stats`] reduces them to a [`CorpusStats`] table whose shares are
//! always derived from exact integer counts; [`validate_stats`] audits a
//! declared table (for example one transcribed from a publication) against
//! its own counts.

use std::collections::{BTreeMap, HashSet};
use std::fmt;
use std::fs::File;
use std::io::{BufRead, BufReader, Read, Write};
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lang::LanguageTag;

/// Percentage-point tolerance for share discrepancies. Absorbs two-decimal
/// rounding in published tables.
pub const SHARE_TOLERANCE: f64 = 0.05;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Source {
    Web,
    Curated,
}

impl std::str::FromStr for Source {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "web" => Ok(Source::Web),
            "curated" => Ok(Source::Curated),
            other => Err(Error::Invalid(format!("unknown source {other:?}"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Document {
    pub id: String,
    #[serde(rename = "lang")]
    pub language: LanguageTag,
    pub source: Source,
    pub text: String,
    #[serde(rename = "tokens", default, skip_serializing_if = "Option::is_none")]
    pub cached_token_count: Option<u64>,
}

impl Document {
    pub fn new(id: impl Into<String>, language: LanguageTag, source: Source, text: impl Into<String>) -> Self {
        Document {
            id: id.into(),
            language,
            source,
            text: text.into(),
            cached_token_count: None,
        }
    }

    /// Token count under `counter`, preferring the cached value when the
    /// document carries one.
    pub fn token_count(&self, counter: &dyn TokenCounter) -> u64 {
        self.cached_token_count
            .unwrap_or_else(|| counter.count_tokens(&self.text))
    }
}

/// What a count in [`CorpusStats`] measures.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum CountUnit {
    #[serde(rename = "tokens")]
    Tokens,
    #[serde(rename = "word-denominated")]
    Words,
}

impl fmt::Display for CountUnit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            CountUnit::Tokens => "tokens",
            CountUnit::Words => "word-denominated",
        })
    }
}

/// Anything that can measure text length in tokens.
pub trait TokenCounter: Sync {
    fn count_tokens(&self, text: &str) -> u64;

    fn unit(&self) -> CountUnit {
        CountUnit::Tokens
    }
}

/// Fallback counter used when no tokenizer is supplied: whitespace-delimited
/// words.
#[derive(Clone, Copy, Debug, Default)]
pub struct WhitespaceWords;

impl TokenCounter for WhitespaceWords {
    fn count_tokens(&self, text: &str) -> u64 {
        text.split_whitespace().count() as u64
    }

    fn unit(&self) -> CountUnit {
        CountUnit::Words
    }
}

#[derive(Deserialize)]
struct RawRecord {
    #[serde(default)]
    provenance: Option<serde_json::Value>,
    id: Option<String>,
    text: Option<String>,
    lang: Option<String>,
    source: Option<String>,
    tokens: Option<u64>,
}

/// Streaming JSONL reader. Yields documents in file order; blank lines and
/// provenance header lines are skipped.
pub struct DocumentReader<R> {
    reader: R,
    path: PathBuf,
    line_no: usize,
    seen_ids: HashSet<String>,
    buf: String,
    failed: bool,
}

impl<R: BufRead> DocumentReader<R> {
    pub fn new(reader: R, path: impl Into<PathBuf>) -> Self {
        DocumentReader {
            reader,
            path: path.into(),
            line_no: 0,
            seen_ids: HashSet::new(),
            buf: String::new(),
            failed: false,
        }
    }

    fn malformed(&self, message: impl Into<String>) -> Error {
        Error::MalformedRecord {
            path: self.path.clone(),
            line: self.line_no,
            message: message.into(),
        }
    }

    fn parse_line(&mut self, line: &str) -> Result<Option<Document>> {
        let raw: RawRecord = serde_json::from_str(line).map_err(|e| self.malformed(e.to_string()))?;
        if raw.provenance.is_some() {
            return Ok(None);
        }
        let id = raw.id.ok_or_else(|| self.malformed("missing field `id`"))?;
        let text = raw.text.ok_or_else(|| self.malformed("missing field `text`"))?;
        if text.is_empty() {
            return Err(self.malformed(format!("document {id:?} has empty text")));
        }
        let language = raw
            .lang
            .as_deref()
            .map(LanguageTag::from_code)
            .unwrap_or(LanguageTag::Unknown);
        let source = match raw.source.as_deref() {
            None => Source::Web,
            Some(s) => s.parse().map_err(|e: Error| self.malformed(e.to_string()))?,
        };
        if !self.seen_ids.insert(id.clone()) {
            return Err(self.malformed(format!("duplicate document id {id:?}")));
        }
        Ok(Some(Document {
            id,
            language,
            source,
            text,
            cached_token_count: raw.tokens,
        }))
    }
}

impl<R: BufRead> Iterator for DocumentReader<R> {
    type Item = Result<Document>;

    fn next(&mut self) -> Option<Self::Item> {
        if self.failed {
            return None;
        }
        loop {
            self.buf.clear();
            match self.reader.read_line(&mut self.buf) {
                Ok(0) => return None,
                Ok(_) => {}
                Err(e) => {
                    self.failed = true;
                    return Some(Err(Error::io(&self.path, e)));
                }
            }
            self.line_no += 1;
            let line = std::mem::take(&mut self.buf);
            let trimmed = line.trim();
            if trimmed.is_empty() {
                continue;
            }
            match self.parse_line(trimmed) {
                Ok(Some(doc)) => return Some(Ok(doc)),
                Ok(None) => continue,
                Err(e) => {
                    self.failed = true;
                    return Some(Err(e));
                }
            }
        }
    }
}

/// Open a JSONL corpus for streaming.
pub fn ingest_corpus(path: impl AsRef<Path>) -> Result<DocumentReader<BufReader<File>>> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    Ok(DocumentReader::new(BufReader::new(file), path))
}

/// Read a whole JSONL corpus into memory.
pub fn read_corpus(path: impl AsRef<Path>) -> Result<Vec<Document>> {
    ingest_corpus(path)?.collect()
}

pub fn write_documents<W: Write>(mut out: W, docs: &[Document]) -> Result<()> {
    for doc in docs {
        serde_json::to_writer(&mut out, doc)?;
        out.write_all(b"\n").map_err(|e| Error::io("<output>", e))?;
    }
    Ok(())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StatsRow {
    pub lang: LanguageTag,
    pub curated_tokens: u64,
    pub web_tokens: u64,
    pub total_tokens: u64,
    pub curated_share: f64,
    pub total_share: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StatsTotals {
    pub curated_tokens: u64,
    pub web_tokens: u64,
    pub total_tokens: u64,
    pub curated_share: f64,
    pub total_share: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CorpusStats {
    pub unit: CountUnit,
    pub rows: Vec<StatsRow>,
    pub totals: StatsTotals,
}

fn percent(part: u64, whole: u64) -> f64 {
    if whole == 0 {
        0.0
    } else {
        part as f64 / whole as f64 * 100.0
    }
}

/// Per-language (curated, web) counts. Merging is associative and
/// commutative, so shards can be reduced in any order.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct StatsAccumulator {
    counts: BTreeMap<LanguageTag, (u64, u64)>,
}

impl StatsAccumulator {
    pub fn add(&mut self, language: LanguageTag, source: Source, tokens: u64) {
        let entry = self.counts.entry(language).or_default();
        match source {
            Source::Curated => entry.0 += tokens,
            Source::Web => entry.1 += tokens,
        }
    }

    pub fn merge(mut self, other: StatsAccumulator) -> StatsAccumulator {
        for (lang, (curated, web)) in other.counts {
            let entry = self.counts.entry(lang).or_default();
            entry.0 += curated;
            entry.1 += web;
        }
        self
    }

    pub fn finish(self, unit: CountUnit) -> CorpusStats {
        let grand: u64 = self.counts.values().map(|(c, w)| c + w).sum();
        let rows: Vec<StatsRow> = self
            .counts
            .into_iter()
            .map(|(lang, (curated, web))| {
                let total = curated + web;
                StatsRow {
                    lang,
                    curated_tokens: curated,
                    web_tokens: web,
                    total_tokens: total,
                    curated_share: percent(curated, total),
                    total_share: percent(total, grand),
                }
            })
            .collect();
        let curated: u64 = rows.iter().map(|r| r.curated_tokens).sum();
        let web: u64 = rows.iter().map(|r| r.web_tokens).sum();
        CorpusStats {
            unit,
            totals: StatsTotals {
                curated_tokens: curated,
                web_tokens: web,
                total_tokens: grand,
                curated_share: percent(curated, curated + web),
                total_share: if grand == 0 { 0.0 } else { 100.0 },
            },
            rows,
        }
    }
}

/// Per-language, per-source token totals. Shards are counted in parallel.
pub fn compute_stats(docs: &[Document], counter: &dyn TokenCounter) -> CorpusStats {
    docs.par_iter()
        .fold(StatsAccumulator::default, |mut acc, doc| {
            acc.add(doc.language, doc.source, doc.token_count(counter));
            acc
        })
        .reduce(StatsAccumulator::default, StatsAccumulator::merge)
        .finish(counter.unit())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StatsField {
    CuratedTokens,
    WebTokens,
    TotalTokens,
    CuratedShare,
    TotalShare,
}

impl fmt::Display for StatsField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            StatsField::CuratedTokens => "curated_tokens",
            StatsField::WebTokens => "web_tokens",
            StatsField::TotalTokens => "total_tokens",
            StatsField::CuratedShare => "curated_share",
            StatsField::TotalShare => "total_share",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Discrepancy {
    /// Language code, or `Total` for the grand-total row.
    pub row: String,
    pub field: StatsField,
    pub declared: f64,
    pub recomputed: f64,
}

/// Recompute every derived field of a declared table from its counts.
///
/// Counts must match exactly; shares may drift by [`SHARE_TOLERANCE`]
/// percentage points. Total shares are taken relative to the declared grand
/// total, and the grand-total row is itself checked against the column sums.
pub fn validate_stats(declared: &CorpusStats) -> Vec<Discrepancy> {
    let mut out = Vec::new();
    let grand = declared.totals.total_tokens;

    let check_count = |out: &mut Vec<Discrepancy>, row: &str, field, declared: u64, recomputed: u64| {
        if declared != recomputed {
            out.push(Discrepancy {
                row: row.to_string(),
                field,
                declared: declared as f64,
                recomputed: recomputed as f64,
            });
        }
    };
    let check_share = |out: &mut Vec<Discrepancy>, row: &str, field, declared: f64, recomputed: f64| {
        if (declared - recomputed).abs() > SHARE_TOLERANCE {
            out.push(Discrepancy {
                row: row.to_string(),
                field,
                declared,
                recomputed,
            });
        }
    };

    for row in &declared.rows {
        let label = row.lang.as_str();
        let sum = row.curated_tokens + row.web_tokens;
        check_count(&mut out, label, StatsField::TotalTokens, row.total_tokens, sum);
        check_share(
            &mut out,
            label,
            StatsField::CuratedShare,
            row.curated_share,
            percent(row.curated_tokens, sum),
        );
        check_share(
            &mut out,
            label,
            StatsField::TotalShare,
            row.total_share,
            percent(row.total_tokens, grand),
        );
    }

    let totals = &declared.totals;
    let curated: u64 = declared.rows.iter().map(|r| r.curated_tokens).sum();
    let web: u64 = declared.rows.iter().map(|r| r.web_tokens).sum();
    let total: u64 = declared.rows.iter().map(|r| r.total_tokens).sum();
    check_count(
        &mut out,
        "Total",
        StatsField::CuratedTokens,
        totals.curated_tokens,
        curated,
    );
    check_count(&mut out, "Total", StatsField::WebTokens, totals.web_tokens, web);
    check_count(&mut out, "Total", StatsField::TotalTokens, totals.total_tokens, total);
    check_share(
        &mut out,
        "Total",
        StatsField::CuratedShare,
        totals.curated_share,
        percent(totals.curated_tokens, totals.curated_tokens + totals.web_tokens),
    );
    // Each row's share may carry up to half a unit of two-decimal rounding,
    // and those errors add up in the column sum.
    let share_sum: f64 = declared.rows.iter().map(|r| r.total_share).sum();
    let sum_tolerance = SHARE_TOLERANCE.max(0.005 * declared.rows.len() as f64);
    if (totals.total_share - share_sum).abs() > sum_tolerance + 1e-9 {
        out.push(Discrepancy {
            row: "Total".to_string(),
            field: StatsField::TotalShare,
            declared: totals.total_share,
            recomputed: share_sum,
        });
    }
    out
}

pub const STATS_HEADER: [&str; 6] = [
    "lang",
    "curated_tokens",
    "web_tokens",
    "total_tokens",
    "curated_share",
    "total_share",
];

/// Write stats as CSV. Shares are printed with two decimals; a trailing
/// `Total` row carries the grand totals.
pub fn write_stats_csv<W: Write>(out: W, stats: &CorpusStats) -> Result<()> {
    let mut writer = csv::Writer::from_writer(out);
    writer.write_record(STATS_HEADER)?;
    for row in &stats.rows {
        writer.write_record([
            row.lang.as_str().to_string(),
            row.curated_tokens.to_string(),
            row.web_tokens.to_string(),
            row.total_tokens.to_string(),
            format!("{:.2}", row.curated_share),
            format!("{:.2}", row.total_share),
        ])?;
    }
    let t = &stats.totals;
    writer.write_record([
        "Total".to_string(),
        t.curated_tokens.to_string(),
        t.web_tokens.to_string(),
        t.total_tokens.to_string(),
        format!("{:.2}", t.curated_share),
        format!("{:.2}", t.total_share),
    ])?;
    writer.flush().map_err(|e| Error::io("<output>", e))?;
    Ok(())
}

#[derive(Deserialize)]
struct CsvStatsRow {
    lang: String,
    curated_tokens: u64,
    web_tokens: u64,
    total_tokens: u64,
    curated_share: f64,
    total_share: f64,
}

/// Read a stats table from CSV (`#` lines are comments). When no `Total` row
/// is present the grand totals are the column sums.
pub fn read_stats_csv<R: Read>(input: R, unit: CountUnit) -> Result<CorpusStats> {
    let mut reader = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .from_reader(input);
    let mut rows = Vec::new();
    let mut totals = None;
    for record in reader.deserialize() {
        let raw: CsvStatsRow = record?;
        if raw.lang.eq_ignore_ascii_case("total") {
            totals = Some(StatsTotals {
                curated_tokens: raw.curated_tokens,
                web_tokens: raw.web_tokens,
                total_tokens: raw.total_tokens,
                curated_share: raw.curated_share,
                total_share: raw.total_share,
            });
            continue;
        }
        rows.push(StatsRow {
            lang: raw.lang.parse()?,
            curated_tokens: raw.curated_tokens,
            web_tokens: raw.web_tokens,
            total_tokens: raw.total_tokens,
            curated_share: raw.curated_share,
            total_share: raw.total_share,
        });
    }
    let totals = totals.unwrap_or_else(|| {
        let curated = rows.iter().map(|r| r.curated_tokens).sum();
        let web = rows.iter().map(|r| r.web_tokens).sum();
        StatsTotals {
            curated_tokens: curated,
            web_tokens: web,
            total_tokens: rows.iter().map(|r| r.total_tokens).sum(),
            curated_share: percent(curated, curated + web),
            total_share: rows.iter().map(|r| r.total_share).sum(),
        }
    });
    Ok(CorpusStats { unit, rows, totals })
}

pub fn write_discrepancies_csv<W: Write>(out: W, items: &[Discrepancy]) -> Result<()> {
    let mut writer = csv::Writer::from_writer(out);
    writer.write_record(["row", "field", "declared", "recomputed"])?;
    for d in items {
        let recomputed = match d.field {
            StatsField::CuratedShare | StatsField::TotalShare => format!("{:.4}", d.recomputed),
            _ => format!("{}", d.recomputed),
        };
        writer.write_record([
            d.row.clone(),
            d.field.to_string(),
            format!("{}", d.declared),
            recomputed,
        ])?;
    }
    writer.flush().map_err(|e| Error::io("<output>", e))?;
    Ok(())
}
