//! Instruction-data selection: min-max normalized quality and complexity
//! scores, a weighted preference score, greedy cosine-distance diversity
//! filtering, and integer oversampling.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lang::LanguageTag;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InstructionSample {
    pub id: String,
    pub instruction: String,
    pub response: String,
    #[serde(rename = "lang")]
    pub language: LanguageTag,
    pub dataset: String,
    #[serde(rename = "quality")]
    pub raw_quality: f64,
    #[serde(rename = "complexity")]
    pub raw_complexity: f64,
    #[serde(default)]
    pub embedding: Vec<f64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Weights {
    pub quality: f64,
    pub complexity: f64,
}

impl Default for Weights {
    fn default() -> Self {
        Weights {
            quality: 0.7,
            complexity: 0.3,
        }
    }
}

impl Weights {
    pub fn validate(&self) -> Result<()> {
        let sum = self.quality + self.complexity;
        if !sum.is_finite() || (sum - 1.0).abs() > 1e-9 {
            return Err(Error::WeightSum { sum });
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct DatasetConfig {
    /// Distinct samples to keep; `None` keeps every candidate.
    pub sample_size: Option<usize>,
    /// Cosine-distance threshold in [0, 2]; 0 disables the filter.
    pub min_distance: f64,
    pub oversample_factor: u32,
}

impl Default for DatasetConfig {
    fn default() -> Self {
        DatasetConfig {
            sample_size: None,
            min_distance: 0.0,
            oversample_factor: 1,
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SelectionConfig {
    pub weights: Weights,
    pub datasets: BTreeMap<String, DatasetConfig>,
    /// Applied to datasets without their own entry. When absent, such
    /// datasets are dropped.
    pub default: Option<DatasetConfig>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Normalized {
    pub quality: Vec<f64>,
    pub complexity: Vec<f64>,
    pub warnings: Vec<String>,
}

fn min_max(values: impl Iterator<Item = f64> + Clone, name: &str, warnings: &mut Vec<String>) -> Vec<f64> {
    let (lo, hi) = values
        .clone()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v), hi.max(v)));
    let span = hi - lo;
    if span > 0.0 {
        values.map(|v| (v - lo) / span).collect()
    } else {
        let out: Vec<f64> = values.map(|_| 0.5).collect();
        if !out.is_empty() {
            let msg = format!("{name} scores are constant; normalized to 0.5");
            log::warn!("{msg}");
            warnings.push(msg);
        }
        out
    }
}

/// Min-max normalize both score dimensions over the full input.
pub fn normalize_scores(samples: &[InstructionSample]) -> Result<Normalized> {
    for s in samples {
        if !s.raw_quality.is_finite() || !s.raw_complexity.is_finite() {
            return Err(Error::Invalid(format!("sample {:?} has a non-finite score", s.id)));
        }
    }
    let mut warnings = Vec::new();
    let quality = min_max(samples.iter().map(|s| s.raw_quality), "quality", &mut warnings);
    let complexity = min_max(samples.iter().map(|s| s.raw_complexity), "complexity", &mut warnings);
    Ok(Normalized {
        quality,
        complexity,
        warnings,
    })
}

pub fn preference_score(q_norm: f64, c_norm: f64, weights: &Weights) -> Result<f64> {
    weights.validate()?;
    Ok(weights.quality * q_norm + weights.complexity * c_norm)
}

pub fn cosine_distance(a: &[f64], b: &[f64]) -> f64 {
    let dot: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
    let na = a.iter().map(|x| x * x).sum::<f64>().sqrt();
    let nb = b.iter().map(|x| x * x).sum::<f64>().sqrt();
    1.0 - dot / (na * nb)
}

/// Candidate for [`diversity_filter`].
#[derive(Clone, Copy, Debug)]
pub struct Candidate<'a> {
    pub id: &'a str,
    pub embedding: &'a [f64],
}

/// Greedy scan over candidates already sorted by descending preference.
/// A candidate is accepted iff its cosine distance to every accepted one is
/// at least `min_distance`; scanning stops once `quota` are accepted.
/// Returns indices into `candidates`.
pub fn diversity_filter(candidates: &[Candidate<'_>], min_distance: f64, quota: usize) -> Result<Vec<usize>> {
    if !(0.0..=2.0).contains(&min_distance) {
        return Err(Error::Invalid(format!("min_distance {min_distance} outside [0, 2]")));
    }
    let mut accepted: Vec<usize> = Vec::new();
    if min_distance == 0.0 {
        accepted.extend(0..candidates.len().min(quota));
        return Ok(accepted);
    }
    let mut units: Vec<Vec<f64>> = Vec::new();
    let dim = candidates.first().map_or(0, |c| c.embedding.len());
    for (i, cand) in candidates.iter().enumerate() {
        if accepted.len() >= quota {
            break;
        }
        if cand.embedding.len() != dim {
            return Err(Error::EmbeddingDimension {
                id: cand.id.to_string(),
                expected: dim,
                found: cand.embedding.len(),
            });
        }
        let norm = cand.embedding.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm == 0.0 || !norm.is_finite() {
            return Err(Error::ZeroNormEmbedding(cand.id.to_string()));
        }
        let unit: Vec<f64> = cand.embedding.iter().map(|x| x / norm).collect();
        let far_enough = units.iter().all(|u| {
            let sim: f64 = u.iter().zip(&unit).map(|(a, b)| a * b).sum();
            1.0 - sim >= min_distance
        });
        if far_enough {
            accepted.push(i);
            units.push(unit);
        }
    }
    Ok(accepted)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Oversampled<T> {
    #[serde(flatten)]
    pub item: T,
    pub copy: u32,
}

/// Repeat every sample `factor` times, tagging copies `0..factor`.
/// Copies of one sample are adjacent.
pub fn apply_oversampling<T: Clone>(samples: &[T], factor: u32) -> Result<Vec<Oversampled<T>>> {
    if factor < 1 {
        return Err(Error::OversampleFactor(factor));
    }
    Ok(samples
        .iter()
        .flat_map(|s| (0..factor).map(move |copy| Oversampled { item: s.clone(), copy }))
        .collect())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScoredSample {
    #[serde(flatten)]
    pub sample: InstructionSample,
    pub q_norm: f64,
    pub c_norm: f64,
    pub preference: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DatasetReport {
    pub dataset: String,
    pub requested: Option<usize>,
    /// Distinct samples chosen, before oversampling.
    pub selected: usize,
    pub mean_p: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Selection {
    pub samples: Vec<Oversampled<ScoredSample>>,
    pub report: Vec<DatasetReport>,
    pub warnings: Vec<String>,
}

/// Descending preference, ties by ascending id.
fn by_preference(a: &ScoredSample, b: &ScoredSample) -> Ordering {
    b.preference
        .total_cmp(&a.preference)
        .then_with(|| a.sample.id.cmp(&b.sample.id))
}

/// Full pipeline: normalize over all samples, score, then per dataset
/// (alphabetical) sort, diversity-filter to quota, and oversample.
pub fn select(samples: &[InstructionSample], config: &SelectionConfig) -> Result<Selection> {
    config.weights.validate()?;
    let norm = normalize_scores(samples)?;
    let mut by_dataset: BTreeMap<&str, Vec<ScoredSample>> = BTreeMap::new();
    for (i, s) in samples.iter().enumerate() {
        let (q, c) = (norm.quality[i], norm.complexity[i]);
        by_dataset.entry(s.dataset.as_str()).or_default().push(ScoredSample {
            sample: s.clone(),
            q_norm: q,
            c_norm: c,
            preference: preference_score(q, c, &config.weights)?,
        });
    }

    let mut out = Vec::new();
    let mut report = Vec::new();
    let mut warnings = norm.warnings;
    for (dataset, mut pool) in by_dataset {
        let Some(ds) = config.datasets.get(dataset).or(config.default.as_ref()) else {
            let msg = format!("dataset {dataset:?} has no selection config; skipped");
            log::warn!("{msg}");
            warnings.push(msg);
            continue;
        };
        pool.sort_by(by_preference);
        let candidates: Vec<Candidate<'_>> = pool
            .iter()
            .map(|s| Candidate {
                id: &s.sample.id,
                embedding: &s.sample.embedding,
            })
            .collect();
        let quota = ds.sample_size.unwrap_or(usize::MAX);
        let picked = diversity_filter(&candidates, ds.min_distance, quota)?;
        let chosen: Vec<ScoredSample> = picked.iter().map(|&i| pool[i].clone()).collect();
        if chosen.len() < quota && ds.sample_size.is_some() {
            let msg = format!("dataset {dataset:?}: requested {quota}, selected {}", chosen.len());
            log::warn!("{msg}");
            warnings.push(msg);
        }
        let mean_p = if chosen.is_empty() {
            0.0
        } else {
            chosen.iter().map(|s| s.preference).sum::<f64>() / chosen.len() as f64
        };
        report.push(DatasetReport {
            dataset: dataset.to_string(),
            requested: ds.sample_size,
            selected: chosen.len(),
            mean_p,
        });
        out.extend(apply_oversampling(&chosen, ds.oversample_factor)?);
    }
    Ok(Selection {
        samples: out,
        report,
        warnings,
    })
}

pub fn read_samples<R: BufRead>(input: R) -> Result<Vec<InstructionSample>> {
    let mut out = Vec::new();
    for (i, line) in input.lines().enumerate() {
        let line = line.map_err(|e| Error::io("<input>", e))?;
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let value: serde_json::Value = serde_json::from_str(line).map_err(|e| Error::MalformedRecord {
            path: "<samples>".into(),
            line: i + 1,
            message: e.to_string(),
        })?;
        if value.get("provenance").is_some() {
            continue;
        }
        let sample = serde_json::from_value(value).map_err(|e| Error::MalformedRecord {
            path: "<samples>".into(),
            line: i + 1,
            message: e.to_string(),
        })?;
        out.push(sample);
    }
    Ok(out)
}

pub fn write_report_csv<W: Write>(out: W, report: &[DatasetReport]) -> Result<()> {
    let mut writer = csv::Writer::from_writer(out);
    writer.write_record(["dataset", "requested", "selected", "mean_p"])?;
    for r in report {
        let requested = r.requested.map_or_else(|| "all".to_string(), |n| n.to_string());
        writer.write_record([
            r.dataset.clone(),
            requested,
            r.selected.to_string(),
            format!("{:.6}", r.mean_p),
        ])?;
    }
    writer.flush().map_err(|e| Error::io("<output>", e))?;
    Ok(())
}
