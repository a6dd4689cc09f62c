//! Language mixture planning and execution.
//!
//! A [`MixturePlan`] turns per-language availability, target shares and a
//! token budget into sampling factors (epochs over the available data).
//! [`execute_plan`] realizes a plan at document granularity: whole epochs
//! for the integer part of the factor, then a seeded shuffle-prefix for the
//! remainder, stopping at the document boundary closest to the target.

use std::collections::BTreeMap;
use std::io::Write;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::corpus::{Document, TokenCounter};
use crate::error::{Error, Result};
use crate::lang::LanguageTag;

pub const SHARE_SUM_TOLERANCE: f64 = 0.05;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Resampling {
    UpSampled,
    DownSampled,
    Unchanged,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LanguagePlan {
    pub lang: LanguageTag,
    pub available: u64,
    pub share: f64,
    pub target: u64,
    pub factor: f64,
    pub resampling: Resampling,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MixturePlan {
    pub budget: u64,
    pub languages: Vec<LanguagePlan>,
}

impl MixturePlan {
    pub fn get(&self, lang: LanguageTag) -> Option<&LanguagePlan> {
        self.languages.iter().find(|l| l.lang == lang)
    }

    pub fn to_json(&self) -> Result<String> {
        let mut s = serde_json::to_string_pretty(self)?;
        s.push('\n');
        Ok(s)
    }

    /// Parse a plan file and re-derive targets and factors from
    /// `budget`, `share` and `available`.
    pub fn from_json(json: &str) -> Result<MixturePlan> {
        #[derive(Deserialize)]
        struct Entry {
            lang: LanguageTag,
            available: u64,
            share: f64,
        }
        #[derive(Deserialize)]
        struct File {
            budget: u64,
            languages: Vec<Entry>,
        }
        let file: File = serde_json::from_str(json)?;
        let available = file.languages.iter().map(|e| (e.lang, e.available)).collect();
        let targets = file.languages.iter().map(|e| (e.lang, e.share)).collect();
        plan_mixture(&available, &targets, file.budget)
    }
}

/// Build a plan. Languages present only in `available` get share 0.
///
/// `target = round(budget · share / 100)` and `factor = target / available`.
pub fn plan_mixture(
    available: &BTreeMap<LanguageTag, u64>,
    targets: &BTreeMap<LanguageTag, f64>,
    budget: u64,
) -> Result<MixturePlan> {
    if let Some((lang, share)) = targets.iter().find(|(_, s)| !s.is_finite() || **s < 0.0) {
        return Err(Error::Invalid(format!("invalid share {share} for {lang}")));
    }
    let sum: f64 = targets.values().sum();
    if (sum - 100.0).abs() > SHARE_SUM_TOLERANCE {
        return Err(Error::ShareSum { sum });
    }
    let mut langs: Vec<LanguageTag> = available.keys().chain(targets.keys()).copied().collect();
    langs.sort();
    langs.dedup();

    let mut out = Vec::with_capacity(langs.len());
    for lang in langs {
        let avail = available.get(&lang).copied().unwrap_or(0);
        let share = targets.get(&lang).copied().unwrap_or(0.0);
        let target = (budget as f64 * share / 100.0).round() as u64;
        if target > 0 && avail == 0 {
            return Err(Error::NoAvailability(lang));
        }
        let factor = if target == 0 { 0.0 } else { target as f64 / avail as f64 };
        let resampling = if target > avail {
            Resampling::UpSampled
        } else if target < avail {
            Resampling::DownSampled
        } else {
            Resampling::Unchanged
        };
        out.push(LanguagePlan {
            lang,
            available: avail,
            share,
            target,
            factor,
            resampling,
        });
    }
    Ok(MixturePlan { budget, languages: out })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LanguageOutcome {
    pub lang: LanguageTag,
    pub target: u64,
    pub realized: u64,
    pub full_epochs: u64,
    pub documents: usize,
    /// Largest single document, i.e. the tolerance on `realized`.
    pub max_doc_tokens: u64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct MixOutput {
    pub documents: Vec<Document>,
    pub outcomes: Vec<LanguageOutcome>,
}

/// Number of leading entries of `sizes` whose sum lands closest to `goal`
/// (ties go to the shorter prefix).
fn closest_prefix(sizes: &[u64], goal: u64) -> usize {
    let mut acc = 0u64;
    for (i, &size) in sizes.iter().enumerate() {
        if acc + size >= goal {
            let under = goal - acc;
            let over = acc + size - goal;
            return if over < under { i + 1 } else { i };
        }
        acc += size;
    }
    sizes.len()
}

/// Sample `corpus` according to `plan`. Deterministic given `seed`.
///
/// Per language, the corpus must hold at least the plan's declared
/// availability. Epoch and remainder arithmetic uses the measured token
/// count. Output interleaves languages round-robin in a seeded order.
pub fn execute_plan(
    plan: &MixturePlan,
    corpus: &[Document],
    counter: &dyn TokenCounter,
    seed: u64,
) -> Result<MixOutput> {
    let mut by_lang: BTreeMap<LanguageTag, Vec<(&Document, u64)>> = BTreeMap::new();
    for doc in corpus {
        by_lang
            .entry(doc.language)
            .or_default()
            .push((doc, doc.token_count(counter)));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut streams: Vec<Vec<&Document>> = Vec::new();
    let mut outcomes = Vec::new();
    // Running (realized − target) over the languages done so far. Each
    // language's cut absorbs the previous overshoot, so the total stays
    // within half a document of the budget.
    let mut carry: i64 = 0;
    for entry in &plan.languages {
        let docs = by_lang.get(&entry.lang).map(Vec::as_slice).unwrap_or(&[]);
        let actual: u64 = docs.iter().map(|(_, t)| t).sum();
        if actual < entry.available {
            return Err(Error::AvailabilityMismatch {
                language: entry.lang,
                declared: entry.available,
                actual,
            });
        }
        // Every language consumes one shuffle so streams stay aligned with
        // the seed regardless of which languages are empty.
        let mut order: Vec<usize> = (0..docs.len()).collect();
        order.shuffle(&mut rng);

        let mut stream = Vec::new();
        let (full_epochs, remainder) = if entry.target == 0 || actual == 0 {
            (0, 0)
        } else {
            (entry.target / actual, entry.target % actual)
        };
        for _ in 0..full_epochs {
            stream.extend(docs.iter().map(|(d, _)| *d));
        }
        let sizes: Vec<u64> = order.iter().map(|&i| docs[i].1).collect();
        let goal = if entry.target == 0 {
            0
        } else {
            (remainder as i64 - carry).max(0) as u64
        };
        let take = closest_prefix(&sizes, goal);
        stream.extend(order[..take].iter().map(|&i| docs[i].0));

        let realized = full_epochs * actual + sizes[..take].iter().sum::<u64>();
        carry += realized as i64 - entry.target as i64;
        outcomes.push(LanguageOutcome {
            lang: entry.lang,
            target: entry.target,
            realized,
            full_epochs,
            documents: stream.len(),
            max_doc_tokens: docs.iter().map(|(_, t)| *t).max().unwrap_or(0),
        });
        streams.push(stream);
    }

    let mut lane_order: Vec<usize> = (0..streams.len()).collect();
    lane_order.shuffle(&mut rng);
    let total: usize = streams.iter().map(Vec::len).sum();
    let mut documents = Vec::with_capacity(total);
    let mut cursors = vec![0usize; streams.len()];
    while documents.len() < total {
        for &lane in &lane_order {
            if let Some(doc) = streams[lane].get(cursors[lane]) {
                documents.push((*doc).clone());
                cursors[lane] += 1;
            }
        }
    }
    Ok(MixOutput { documents, outcomes })
}

/// Per-language share (percent) of realized tokens.
pub fn realized_distribution(docs: &[Document], counter: &dyn TokenCounter) -> BTreeMap<LanguageTag, f64> {
    let mut counts: BTreeMap<LanguageTag, u64> = BTreeMap::new();
    for doc in docs {
        *counts.entry(doc.language).or_default() += doc.token_count(counter);
    }
    let total: u64 = counts.values().sum();
    if total == 0 {
        return BTreeMap::new();
    }
    counts
        .into_iter()
        .map(|(lang, n)| (lang, n as f64 / total as f64 * 100.0))
        .collect()
}

/// Parse `lang=share` pairs, comma- or whitespace-separated.
pub fn parse_inline_shares(spec: &str) -> Result<BTreeMap<LanguageTag, f64>> {
    let mut out = BTreeMap::new();
    for pair in spec
        .split(|c: char| c == ',' || c.is_whitespace())
        .filter(|s| !s.is_empty())
    {
        let (lang, value) = pair
            .split_once('=')
            .ok_or_else(|| Error::Invalid(format!("expected lang=value, got {pair:?}")))?;
        let value: f64 = value
            .trim()
            .parse()
            .map_err(|_| Error::Invalid(format!("bad number in {pair:?}")))?;
        out.insert(lang.trim().parse()?, value);
    }
    Ok(out)
}

/// Read `lang,share` rows (header optional, `#` comments allowed).
pub fn read_shares_csv<R: std::io::Read>(input: R) -> Result<BTreeMap<LanguageTag, f64>> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .from_reader(input);
    let mut out = BTreeMap::new();
    for record in reader.records() {
        let record = record?;
        let (Some(lang), Some(share)) = (record.get(0), record.get(1)) else {
            continue;
        };
        let Ok(share) = share.parse::<f64>() else {
            // header row
            continue;
        };
        out.insert(lang.parse()?, share);
    }
    Ok(out)
}

pub fn write_outcomes_csv<W: Write>(out: W, outcomes: &[LanguageOutcome]) -> Result<()> {
    let mut writer = csv::Writer::from_writer(out);
    writer.write_record([
        "lang",
        "target",
        "realized",
        "full_epochs",
        "documents",
        "max_doc_tokens",
    ])?;
    for o in outcomes {
        writer.write_record([
            o.lang.to_string(),
            o.target.to_string(),
            o.realized.to_string(),
            o.full_epochs.to_string(),
            o.documents.to_string(),
            o.max_doc_tokens.to_string(),
        ])?;
    }
    writer.flush().map_err(|e| Error::io("<output>", e))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{Source, WhitespaceWords};

    fn map<T: Copy>(pairs: &[(LanguageTag, T)]) -> BTreeMap<LanguageTag, T> {
        pairs.iter().copied().collect()
    }

    fn docs(lang: LanguageTag, n: usize, words: usize) -> Vec<Document> {
        (0..n)
            .map(|i| Document::new(format!("{lang}{i}"), lang, Source::Web, vec!["w"; words].join(" ")))
            .collect()
    }

    #[test]
    fn single_language_fixpoint() {
        let plan = plan_mixture(&map(&[(LanguageTag::De, 500)]), &map(&[(LanguageTag::De, 100.0)]), 500).unwrap();
        assert_eq!(plan.languages[0].factor, 1.0);
        assert_eq!(plan.languages[0].resampling, Resampling::Unchanged);
    }

    #[test]
    fn english_surplus_is_down_sampled() {
        let plan = plan_mixture(
            &map(&[(LanguageTag::En, 1000), (LanguageTag::De, 100)]),
            &map(&[(LanguageTag::En, 50.0), (LanguageTag::De, 50.0)]),
            1000,
        )
        .unwrap();
        let en = plan.get(LanguageTag::En).unwrap();
        assert_eq!(en.target, 500);
        assert_eq!(en.factor, 0.5);
        assert_eq!(en.resampling, Resampling::DownSampled);
        assert_eq!(plan.get(LanguageTag::De).unwrap().resampling, Resampling::UpSampled);
    }

    #[test]
    fn share_sum_and_availability_errors() {
        let err = plan_mixture(&map(&[(LanguageTag::De, 1)]), &map(&[(LanguageTag::De, 99.9)]), 10).unwrap_err();
        assert!(matches!(err, Error::ShareSum { .. }));
        let err = plan_mixture(
            &map(&[(LanguageTag::De, 1)]),
            &map(&[(LanguageTag::De, 50.0), (LanguageTag::Fr, 50.0)]),
            10,
        )
        .unwrap_err();
        assert!(matches!(err, Error::NoAvailability(LanguageTag::Fr)));
    }

    #[test]
    fn integer_factor_repeats_every_document() {
        let corpus = docs(LanguageTag::Fi, 7, 3);
        let plan = plan_mixture(&map(&[(LanguageTag::Fi, 21)]), &map(&[(LanguageTag::Fi, 100.0)]), 42).unwrap();
        assert_eq!(plan.languages[0].factor, 2.0);
        let out = execute_plan(&plan, &corpus, &WhitespaceWords, 3).unwrap();
        assert_eq!(out.documents.len(), 14);
        for d in &corpus {
            assert_eq!(out.documents.iter().filter(|o| o.id == d.id).count(), 2);
        }
    }

    #[test]
    fn half_factor_selects_half_reproducibly() {
        let corpus = docs(LanguageTag::Pl, 100, 4);
        let plan = plan_mixture(&map(&[(LanguageTag::Pl, 400)]), &map(&[(LanguageTag::Pl, 100.0)]), 200).unwrap();
        let a = execute_plan(&plan, &corpus, &WhitespaceWords, 9).unwrap();
        let b = execute_plan(&plan, &corpus, &WhitespaceWords, 9).unwrap();
        assert_eq!(a.documents.len(), 50);
        assert_eq!(a, b);
        let c = execute_plan(&plan, &corpus, &WhitespaceWords, 10).unwrap();
        assert_ne!(a.documents, c.documents);
    }

    #[test]
    fn zero_factor_drops_language() {
        let mut corpus = docs(LanguageTag::Pl, 10, 4);
        corpus.extend(docs(LanguageTag::Sk, 10, 4));
        let plan = plan_mixture(
            &map(&[(LanguageTag::Pl, 40), (LanguageTag::Sk, 40)]),
            &map(&[(LanguageTag::Pl, 100.0)]),
            40,
        )
        .unwrap();
        let out = execute_plan(&plan, &corpus, &WhitespaceWords, 1).unwrap();
        assert!(out.documents.iter().all(|d| d.language == LanguageTag::Pl));
    }

    #[test]
    fn short_corpus_is_a_mismatch() {
        let corpus = docs(LanguageTag::Lv, 2, 2);
        let plan = plan_mixture(&map(&[(LanguageTag::Lv, 10)]), &map(&[(LanguageTag::Lv, 100.0)]), 10).unwrap();
        let err = execute_plan(&plan, &corpus, &WhitespaceWords, 0).unwrap_err();
        assert!(matches!(
            err,
            Error::AvailabilityMismatch {
                actual: 4,
                declared: 10,
                ..
            }
        ));
    }

    #[test]
    fn distribution_edges() {
        assert!(realized_distribution(&[], &WhitespaceWords).is_empty());
        let d = realized_distribution(&docs(LanguageTag::Ro, 3, 2), &WhitespaceWords);
        assert_eq!(d[&LanguageTag::Ro], 100.0);
    }

    #[test]
    fn closest_prefix_picks_nearest_boundary() {
        assert_eq!(closest_prefix(&[10, 10, 10], 0), 0);
        assert_eq!(closest_prefix(&[10, 10, 10], 14), 1);
        assert_eq!(closest_prefix(&[10, 10, 10], 16), 2);
        assert_eq!(closest_prefix(&[10, 10, 10], 15), 1);
        assert_eq!(closest_prefix(&[10, 10, 10], 99), 3);
    }

    #[test]
    fn inline_and_csv_shares() {
        let inline = parse_inline_shares("en=60, de=40").unwrap();
        assert_eq!(inline[&LanguageTag::En], 60.0);
        let csv = "lang,share\nen,60\nde,40\n";
        assert_eq!(read_shares_csv(csv.as_bytes()).unwrap(), inline);
        assert!(parse_inline_shares("en:60").is_err());
    }

    #[test]
    fn plan_file_roundtrip() {
        let plan = plan_mixture(
            &map(&[(LanguageTag::En, 1000), (LanguageTag::De, 100)]),
            &map(&[(LanguageTag::En, 70.0), (LanguageTag::De, 30.0)]),
            800,
        )
        .unwrap();
        assert_eq!(MixturePlan::from_json(&plan.to_json().unwrap()).unwrap(), plan);
    }
}
