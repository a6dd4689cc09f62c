//! One handler per subcommand: resolve parameters, run the library call,
//! write provenance-stamped outputs.

use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufRead, BufReader};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use eumix::ablation::{self, AblationEntry, RunLog};
use eumix::bpe::{self, Pretokenize, TrainerConfig, Vocab, SPECIAL_TOKENS};
use eumix::corpus::{self, CountUnit, TokenCounter, WhitespaceWords};
use eumix::fertility::{compare_tokenizers, ParallelCorpus};
use eumix::metrics::{self, EvalMatrix, Subset, Task};
use eumix::mixer::{self, MixturePlan};
use eumix::packer::{self, PackConfig, PackingPolicy, TokenizedSample};
use eumix::schedule::{self, ScheduleSpec};
use eumix::selection::{self, DatasetConfig, SelectionConfig, Weights};
use eumix::LanguageTag;

use crate::args::*;
use crate::config::FileConfig;
use crate::output::{require_input, Provenance};

pub enum Status {
    Ok,
    /// The command ran but found problems in its input.
    Failed,
}

impl From<Status> for ExitCode {
    fn from(s: Status) -> ExitCode {
        match s {
            Status::Ok => ExitCode::SUCCESS,
            Status::Failed => ExitCode::from(1),
        }
    }
}

struct Ctx {
    config: FileConfig,
    seed: u64,
    json: bool,
}

pub fn dispatch(cli: &Cli) -> Result<Status> {
    let config = FileConfig::load(cli.config.as_deref())?;
    let seed = match cli.seed {
        Some(s) => s,
        None => config.seed()?.unwrap_or(0),
    };
    let ctx = Ctx {
        config,
        seed,
        json: cli.json,
    };
    match &cli.command {
        Command::Corpus(CorpusCommand::Stats(a)) => corpus_stats(&ctx, a),
        Command::Corpus(CorpusCommand::Validate(a)) => corpus_validate(&ctx, a),
        Command::Tok(TokCommand::Train(a)) => tok_train(&ctx, a),
        Command::Tok(TokCommand::Encode(a)) => tok_encode(&ctx, a),
        Command::Fertility(a) => fertility(&ctx, a),
        Command::Mix(MixCommand::Plan(a)) => mix_plan(&ctx, a),
        Command::Mix(MixCommand::Run(a)) => mix_run(&ctx, a),
        Command::Select(a) => select(&ctx, a),
        Command::Pack(a) => pack(&ctx, a),
        Command::Schedule(ScheduleCommand::Preview(a)) => schedule_preview(&ctx, a),
        Command::Ablate(AblateCommand::Normalize(a)) => ablate_normalize(&ctx, a),
        Command::Ablate(AblateCommand::Score(a)) => ablate_score(&ctx, a),
        Command::Metrics(MetricsCommand::Tox(a)) => metrics_tox(&ctx, a),
        Command::Metrics(MetricsCommand::Eval(a)) => metrics_eval(&ctx, a),
    }
}

/// Parse a lowercase enum name through its serde representation.
fn parse_named<T: for<'de> Deserialize<'de>>(what: &str, value: &str) -> Result<T> {
    serde_json::from_value(serde_json::Value::String(value.to_string()))
        .with_context(|| format!("unknown {what} {value:?}"))
}

fn load_counter(vocab: Option<&PathBuf>) -> Result<Box<dyn TokenCounter>> {
    Ok(match vocab {
        Some(path) => {
            let path = require_input("vocab", Some(path))?;
            Box::new(Vocab::load(&path)?)
        }
        None => Box::new(WhitespaceWords),
    })
}

fn parse_languages(codes: &[String]) -> Result<Vec<LanguageTag>> {
    codes
        .iter()
        .map(|c| c.trim().parse::<LanguageTag>().map_err(Into::into))
        .collect()
}

fn corpus_stats(ctx: &Ctx, flags: &CorpusStatsArgs) -> Result<Status> {
    let a = ctx.config.layer(&["corpus", "stats"], flags)?;
    let input = require_input("input", a.input.as_ref())?;
    let counter = load_counter(a.vocab.as_ref())?;
    let docs = corpus::read_corpus(&input)?;
    let stats = corpus::compute_stats(&docs, counter.as_ref());
    log::info!("{} documents, {} {}", docs.len(), stats.totals.total_tokens, stats.unit);
    let prov = Provenance::new("corpus stats", ctx.seed, &a)?;
    if ctx.json {
        prov.json(a.out.as_deref(), &stats)?;
    } else {
        prov.csv(a.out.as_deref(), |w| corpus::write_stats_csv(w, &stats))?;
    }
    Ok(Status::Ok)
}

fn corpus_validate(ctx: &Ctx, flags: &CorpusValidateArgs) -> Result<Status> {
    let a = ctx.config.layer(&["corpus", "validate"], flags)?;
    let table = require_input("table", a.table.as_ref())?;
    let unit = match a.unit.as_deref().unwrap_or("tokens") {
        "tokens" => CountUnit::Tokens,
        "words" | "word-denominated" => CountUnit::Words,
        other => bail!("unknown unit {other:?} (expected tokens or words)"),
    };
    let file = File::open(&table).with_context(|| format!("opening {}", table.display()))?;
    let stats = corpus::read_stats_csv(file, unit)?;
    let found = corpus::validate_stats(&stats);
    let prov = Provenance::new("corpus validate", ctx.seed, &a)?;
    if ctx.json {
        prov.json(a.out.as_deref(), &serde_json::json!({ "discrepancies": found }))?;
    } else {
        prov.csv(a.out.as_deref(), |w| corpus::write_discrepancies_csv(w, &found))?;
    }
    if found.is_empty() {
        Ok(Status::Ok)
    } else {
        eprintln!("{} discrepancies in {}", found.len(), table.display());
        Ok(Status::Failed)
    }
}

fn tok_train(ctx: &Ctx, flags: &TokTrainArgs) -> Result<Status> {
    let a = ctx.config.layer(&["tok", "train"], flags)?;
    let input = require_input("input", a.input.as_ref())?;
    let defaults = TrainerConfig::default();
    let config = TrainerConfig {
        vocab_size: a.vocab_size.unwrap_or(defaults.vocab_size),
        per_language_quota: a.quota.unwrap_or(defaults.per_language_quota),
        languages: parse_languages(a.languages.as_deref().unwrap_or_default())?,
        special_count: a.special_count.unwrap_or(defaults.special_count),
        pretokenize: match &a.pretokenize {
            Some(p) => parse_named::<Pretokenize>("pretokenize mode", p)?,
            None => defaults.pretokenize,
        },
        seed: ctx.seed,
    };
    let docs = corpus::read_corpus(&input)?;
    let vocab = bpe::train_bpe(&docs, &config)?;
    log::info!("trained {} tokens ({} merges)", vocab.len(), vocab.merge_count());
    let prov = Provenance::new("tok train", ctx.seed, &a)?;
    let payload: serde_json::Value = serde_json::from_str(&vocab.to_json()?)?;
    prov.json(a.out.as_deref(), &payload)?;
    Ok(Status::Ok)
}

fn tok_encode(ctx: &Ctx, flags: &TokEncodeArgs) -> Result<Status> {
    #[derive(Serialize)]
    struct Encoded {
        line: usize,
        ids: Vec<bpe::TokenId>,
    }
    let a = ctx.config.layer(&["tok", "encode"], flags)?;
    let vocab = Vocab::load(require_input("vocab", a.vocab.as_ref())?)?;
    let input = require_input("input", a.input.as_ref())?;
    let lines = BufReader::new(File::open(&input)?)
        .lines()
        .collect::<std::io::Result<Vec<String>>>()?;
    let encoded: Vec<Encoded> = lines
        .par_iter()
        .enumerate()
        .map(|(i, l)| Encoded {
            line: i + 1,
            ids: vocab.encode(l).0,
        })
        .collect();
    let prov = Provenance::new("tok encode", ctx.seed, &a)?;
    prov.jsonl(a.out.as_deref(), encoded)?;
    Ok(Status::Ok)
}

fn fertility(ctx: &Ctx, flags: &FertilityArgs) -> Result<Status> {
    let a = ctx.config.layer(&["fertility"], flags)?;
    let dir = require_input("parallel", a.parallel.as_ref())?;
    let specs = a.tokenizers.clone().unwrap_or_default();
    if specs.is_empty() {
        bail!("at least one --tokenizer name=vocab.json is required");
    }
    let mut vocabs = Vec::new();
    for spec in &specs {
        let (name, path) = spec
            .split_once('=')
            .with_context(|| format!("expected name=path, got {spec:?}"))?;
        let path = require_input(name, Some(&PathBuf::from(path)))?;
        vocabs.push((name.to_string(), Vocab::load(&path)?));
    }
    let corpus = ParallelCorpus::from_dir(&dir)?;
    let pairs: Vec<(&str, &dyn TokenCounter)> = vocabs
        .iter()
        .map(|(n, v)| (n.as_str(), v as &dyn TokenCounter))
        .collect();
    let report = compare_tokenizers(&pairs, &corpus)?;
    let prov = Provenance::new("fertility", ctx.seed, &a)?;
    if ctx.json {
        prov.json(a.out.as_deref(), &report)?;
    } else {
        prov.csv(a.out.as_deref(), |w| report.write_csv(w))?;
    }
    Ok(Status::Ok)
}

fn mix_plan(ctx: &Ctx, flags: &MixPlanArgs) -> Result<Status> {
    let a = ctx.config.layer(&["mix", "plan"], flags)?;
    let stats_path = require_input("availability", a.availability.as_ref())?;
    let stats = corpus::read_stats_csv(File::open(&stats_path)?, CountUnit::Tokens)?;
    let available: BTreeMap<LanguageTag, u64> = stats.rows.iter().map(|r| (r.lang, r.total_tokens)).collect();
    let shares_arg = a.shares.as_deref().context("missing --shares")?;
    let shares = if Path::new(shares_arg).is_file() {
        mixer::read_shares_csv(File::open(shares_arg)?)?
    } else {
        mixer::parse_inline_shares(shares_arg)?
    };
    let budget = a.budget.context("missing --budget")?;
    let plan = mixer::plan_mixture(&available, &shares, budget)?;
    let prov = Provenance::new("mix plan", ctx.seed, &a)?;
    prov.json(a.out.as_deref(), &plan)?;
    Ok(Status::Ok)
}

fn mix_run(ctx: &Ctx, flags: &MixRunArgs) -> Result<Status> {
    let a = ctx.config.layer(&["mix", "run"], flags)?;
    let plan_path = require_input("plan", a.plan.as_ref())?;
    let plan = MixturePlan::from_json(&std::fs::read_to_string(&plan_path)?)?;
    let docs = corpus::read_corpus(require_input("corpus", a.corpus.as_ref())?)?;
    let counter = load_counter(a.vocab.as_ref())?;
    let mixed = mixer::execute_plan(&plan, &docs, counter.as_ref(), ctx.seed)?;
    let prov = Provenance::new("mix run", ctx.seed, &a)?;
    prov.jsonl(a.out.as_deref(), &mixed.documents)?;
    if ctx.json {
        let realized = mixer::realized_distribution(&mixed.documents, counter.as_ref());
        let report = serde_json::json!({ "outcomes": mixed.outcomes, "realized_shares": realized });
        match &a.report {
            Some(path) => prov.json(Some(path), &report)?,
            None => eprintln!("{}", serde_json::to_string_pretty(&report)?),
        }
    } else if let Some(path) = &a.report {
        prov.csv(Some(path), |w| mixer::write_outcomes_csv(w, &mixed.outcomes))?;
    }
    Ok(Status::Ok)
}

fn select(ctx: &Ctx, flags: &SelectArgs) -> Result<Status> {
    let a = ctx.config.layer(&["select"], flags)?;
    let input = require_input("input", a.input.as_ref())?;
    let samples = selection::read_samples(BufReader::new(File::open(&input)?))?;
    let datasets = a.datasets.clone().unwrap_or_default();
    let default_given = a.sample_size.is_some() || a.min_distance.is_some() || a.oversample.is_some();
    let default = (datasets.is_empty() || default_given).then(|| DatasetConfig {
        sample_size: a.sample_size,
        min_distance: a.min_distance.unwrap_or(0.0),
        oversample_factor: a.oversample.unwrap_or(1),
    });
    let defaults = Weights::default();
    let config = SelectionConfig {
        weights: Weights {
            quality: a.quality_weight.unwrap_or(defaults.quality),
            complexity: a.complexity_weight.unwrap_or(defaults.complexity),
        },
        datasets,
        default,
    };
    let chosen = selection::select(&samples, &config)?;
    for w in &chosen.warnings {
        log::warn!("{w}");
    }
    let prov = Provenance::new("select", ctx.seed, &a)?;
    prov.jsonl(a.out.as_deref(), &chosen.samples)?;
    if let Some(path) = &a.report {
        if ctx.json {
            prov.json(Some(path), &serde_json::json!({ "datasets": chosen.report }))?;
        } else {
            prov.csv(Some(path), |w| selection::write_report_csv(w, &chosen.report))?;
        }
    }
    Ok(Status::Ok)
}

fn pack(ctx: &Ctx, flags: &PackArgs) -> Result<Status> {
    #[derive(Deserialize)]
    struct Sample {
        id: String,
        instruction: String,
        response: String,
        #[serde(default)]
        copy: u32,
    }
    #[derive(Serialize)]
    struct PackStats {
        pack: usize,
        segments: usize,
        filled: usize,
        utilization: f64,
    }
    let a = ctx.config.layer(&["pack"], flags)?;
    let input = require_input("input", a.input.as_ref())?;
    let vocab = match &a.vocab {
        Some(p) => Vocab::load(require_input("vocab", Some(p))?)?,
        None => Vocab::bytes_only(SPECIAL_TOKENS.len(), Pretokenize::WhitespaceSplit)?,
    };
    let mut samples = Vec::new();
    for (i, line) in BufReader::new(File::open(&input)?).lines().enumerate() {
        let line = line?;
        let value: serde_json::Value = match line.trim() {
            "" => continue,
            t => serde_json::from_str(t).with_context(|| format!("{}:{}", input.display(), i + 1))?,
        };
        if value.get("provenance").is_some() {
            continue;
        }
        let s: Sample = serde_json::from_value(value).with_context(|| format!("{}:{}", input.display(), i + 1))?;
        samples.push(s);
    }
    let bos = vocab.special_id("<|bos|>");
    let eos = vocab.special_id("<|eos|>");
    let tokenized: Vec<TokenizedSample> = samples
        .par_iter()
        .map(|s| {
            let mut instruction: Vec<_> = bos.into_iter().collect();
            instruction.extend(vocab.encode(&s.instruction).0);
            let mut response = vocab.encode(&s.response).0;
            response.extend(eos);
            TokenizedSample {
                id: if s.copy > 0 {
                    format!("{}#{}", s.id, s.copy)
                } else {
                    s.id.clone()
                },
                instruction,
                response,
            }
        })
        .collect();
    let defaults = PackConfig::default();
    let config = PackConfig {
        capacity: a.capacity.unwrap_or(defaults.capacity),
        policy: match &a.policy {
            Some(p) => match p.as_str() {
                "ffd" => PackingPolicy::FirstFitDecreasing,
                other => parse_named::<PackingPolicy>("packing policy", other)?,
            },
            None => defaults.policy,
        },
        truncate_response: a.truncate_response.unwrap_or(false),
    };
    let packs = packer::pack_samples(&tokenized, &config)?;
    let filled: usize = packs.iter().map(|p| p.filled()).sum();
    log::info!(
        "{} samples into {} packs, utilization {:.4}",
        tokenized.len(),
        packs.len(),
        filled as f64 / (packs.len().max(1) * config.capacity) as f64
    );
    let prov = Provenance::new("pack", ctx.seed, &a)?;
    prov.jsonl(a.out.as_deref(), &packs)?;
    if let Some(path) = &a.report {
        let stats: Vec<PackStats> = packs
            .iter()
            .enumerate()
            .map(|(i, p)| PackStats {
                pack: i,
                segments: p.segments.len(),
                filled: p.filled(),
                utilization: p.utilization(),
            })
            .collect();
        if ctx.json {
            prov.json(Some(path), &serde_json::json!({ "packs": stats }))?;
        } else {
            prov.csv(Some(path), |w| {
                let mut writer = csv::Writer::from_writer(w);
                for s in &stats {
                    writer.serialize(s)?;
                }
                writer.flush().map_err(|e| eumix::Error::Invalid(e.to_string()))?;
                Ok(())
            })?;
        }
    }
    Ok(Status::Ok)
}

fn schedule_preview(ctx: &Ctx, flags: &SchedulePreviewArgs) -> Result<Status> {
    let a = ctx.config.layer(&["schedule", "preview"], flags)?;
    let d = ScheduleSpec::default();
    let spec = ScheduleSpec {
        variant: match &a.variant {
            Some(v) => v.parse()?,
            None => d.variant,
        },
        lr_start: a.lr_start.unwrap_or(d.lr_start),
        lr_max: a.lr_max.unwrap_or(d.lr_max),
        lr_min: a.lr_min.unwrap_or(d.lr_min),
        warmup_steps: a.warmup_steps.unwrap_or(d.warmup_steps),
        total_steps: a.total_steps.unwrap_or(d.total_steps),
        handoff_lr: a.handoff_lr.unwrap_or(d.handoff_lr),
        continuation_steps: a.continuation_steps.unwrap_or(d.continuation_steps),
    };
    let series = schedule::render_schedule(&spec, a.resolution.unwrap_or(101))?;
    let prov = Provenance::new("schedule preview", ctx.seed, &a)?;
    if ctx.json {
        prov.json(a.out.as_deref(), &serde_json::json!({ "spec": spec, "series": series }))?;
    } else {
        prov.csv(a.out.as_deref(), |w| schedule::write_schedule_csv(w, &series))?;
    }
    Ok(Status::Ok)
}

fn expand_runs(paths: &[PathBuf]) -> Result<Vec<PathBuf>> {
    let mut out = Vec::new();
    for p in paths {
        let p = require_input("run", Some(p))?;
        if p.is_dir() {
            let mut found: Vec<PathBuf> = std::fs::read_dir(&p)?
                .map(|e| e.map(|e| e.path()))
                .collect::<std::io::Result<Vec<_>>>()?
                .into_iter()
                .filter(|f| f.extension().is_some_and(|e| e == "csv"))
                .collect();
            found.sort();
            out.extend(found);
        } else {
            out.push(p);
        }
    }
    Ok(out)
}

fn ablate_normalize(ctx: &Ctx, flags: &AblateNormalizeArgs) -> Result<Status> {
    let a = ctx.config.layer(&["ablate", "normalize"], flags)?;
    let files = expand_runs(a.runs.as_deref().unwrap_or_default())?;
    if files.is_empty() {
        bail!("no run logs given (--run)");
    }
    let runs: Vec<RunLog> = files.iter().map(ablation::load_run).collect::<eumix::Result<_>>()?;
    let baseline_id = a.baseline.as_deref().unwrap_or("baseline");
    let baseline = runs
        .iter()
        .find(|r| r.run_id == baseline_id)
        .with_context(|| format!("baseline run {baseline_id:?} not among the inputs"))?;
    let curves = runs
        .iter()
        .map(|r| ablation::time_normalize(r, baseline))
        .collect::<eumix::Result<Vec<_>>>()?;
    let probes = match &a.probes {
        Some(p) => p.clone(),
        None => {
            let last = baseline.samples.last().map(|s| s.0).unwrap_or(0) as f64;
            [0.25, 0.5, 0.75, 1.0].iter().map(|f| (f * last).round()).collect()
        }
    };
    let table = ablation::loss_at_equal_compute(&curves, &probes)?;
    let prov = Provenance::new("ablate normalize", ctx.seed, &a)?;
    if ctx.json {
        prov.json(a.out.as_deref(), &table)?;
    } else {
        prov.csv(a.out.as_deref(), |w| table.write_csv(w))?;
    }
    if let Some(path) = &a.curves {
        let raw: BTreeMap<String, RunLog> = runs.iter().map(|r| (r.run_id.clone(), r.clone())).collect();
        prov.csv(Some(path), |w| ablation::write_curves_csv(w, &curves, &raw))?;
    }
    Ok(Status::Ok)
}

fn ablate_score(ctx: &Ctx, flags: &AblateScoreArgs) -> Result<Status> {
    #[derive(Serialize)]
    struct Scored<'a> {
        #[serde(flatten)]
        entry: &'a AblationEntry,
        comparison: Option<ablation::BaselineComparison>,
    }
    let a = ctx.config.layer(&["ablate", "score"], flags)?;
    let evals = require_input("evals", a.evals.as_ref())?;
    let entries = ablation::read_evals_csv(File::open(&evals)?)?;
    let baseline = a.baseline.as_deref().unwrap_or("baseline");
    let prov = Provenance::new("ablate score", ctx.seed, &a)?;
    if ctx.json {
        let base = entries
            .iter()
            .find(|e| e.run == baseline)
            .and_then(|e| e.eval)
            .with_context(|| format!("baseline {baseline:?} missing or not evaluated"))?;
        let scored: Vec<Scored> = entries
            .iter()
            .map(|e| Scored {
                entry: e,
                comparison: e.eval.map(|ev| ablation::score_vs_baseline(&ev, &base)),
            })
            .collect();
        prov.json(
            a.out.as_deref(),
            &serde_json::json!({ "baseline": baseline, "runs": scored }),
        )?;
        return Ok(Status::Ok);
    }
    match a.format.as_deref().unwrap_or("md") {
        "md" | "markdown" => prov.markdown(a.out.as_deref(), &ablation::render_markdown(&entries, baseline)?)?,
        "csv" => prov.csv(a.out.as_deref(), |w| ablation::write_scores_csv(w, &entries, baseline))?,
        other => bail!("unknown format {other:?} (expected md or csv)"),
    }
    Ok(Status::Ok)
}

fn metrics_tox(ctx: &Ctx, flags: &MetricsToxArgs) -> Result<Status> {
    let a = ctx.config.layer(&["metrics", "tox"], flags)?;
    let input = require_input("input", a.input.as_ref())?;
    let records = metrics::read_toxicity_jsonl(BufReader::new(File::open(&input)?))?;
    let threshold = a.threshold.unwrap_or(metrics::DEFAULT_TOXICITY_THRESHOLD);
    let weighted = a.prompt_weighted.unwrap_or(false);
    let summary = metrics::toxicity_summary(&records, threshold)?;
    let prov = Provenance::new("metrics tox", ctx.seed, &a)?;
    if ctx.json {
        let aggregate: BTreeMap<String, _> = [metrics::Attribute::Profanity, metrics::Attribute::Toxicity]
            .into_iter()
            .filter_map(|attr| summary.aggregate(attr, weighted).map(|agg| (attr.to_string(), agg)))
            .collect();
        prov.json(
            a.out.as_deref(),
            &serde_json::json!({ "threshold": threshold, "cells": summary.rows(), "aggregate": aggregate }),
        )?;
    } else {
        prov.csv(a.out.as_deref(), |w| summary.write_csv(w, weighted))?;
    }
    Ok(Status::Ok)
}

fn metrics_eval(ctx: &Ctx, flags: &MetricsEvalArgs) -> Result<Status> {
    #[derive(Serialize)]
    struct RobustRow {
        model: String,
        subset: Subset,
        task: Task,
        #[serde(flatten)]
        stats: metrics::FiveNumber,
    }
    let a = ctx.config.layer(&["metrics", "eval"], flags)?;
    let matrix_path = require_input("matrix", a.matrix.as_ref())?;
    let matrix = EvalMatrix::from_csv(File::open(&matrix_path)?)?;
    let subsets: Vec<Subset> = match &a.subsets {
        Some(names) => names.iter().map(|n| n.parse()).collect::<eumix::Result<_>>()?,
        None => Subset::ALL.to_vec(),
    };
    let models: Vec<String> = match &a.model {
        Some(m) => vec![m.clone()],
        None => matrix.models().map(str::to_string).collect(),
    };
    let prov = Provenance::new("metrics eval", ctx.seed, &a)?;
    if a.robustness.unwrap_or(false) {
        let mut rows = Vec::new();
        for model in &models {
            for &subset in &subsets {
                for task in Task::ALL {
                    let stats = metrics::robustness_stats(&matrix, &subset.languages(), model, task)?;
                    rows.push(RobustRow {
                        model: model.clone(),
                        subset,
                        task,
                        stats,
                    });
                }
            }
        }
        if ctx.json {
            prov.json(a.out.as_deref(), &serde_json::json!({ "robustness": rows }))?;
        } else {
            prov.csv(a.out.as_deref(), |w| {
                let mut writer = csv::Writer::from_writer(w);
                writer.write_record(["model", "subset", "task", "min", "q1", "median", "q3", "max"])?;
                for r in &rows {
                    let s = r.stats;
                    let mut record = vec![r.model.clone(), r.subset.to_string(), r.task.to_string()];
                    record.extend([s.min, s.q1, s.median, s.q3, s.max].iter().map(|v| format!("{v:.4}")));
                    writer.write_record(&record)?;
                }
                writer.flush().map_err(|e| eumix::Error::Invalid(e.to_string()))?;
                Ok(())
            })?;
        }
        return Ok(Status::Ok);
    }
    let mut rows = Vec::new();
    for model in &models {
        for &subset in &subsets {
            rows.push((subset, metrics::aggregate_eval(&matrix, &subset.languages(), model)?));
        }
    }
    if ctx.json {
        let list: Vec<_> = rows
            .iter()
            .map(|(s, agg)| serde_json::json!({ "subset": s, "aggregate": agg }))
            .collect();
        prov.json(a.out.as_deref(), &serde_json::json!({ "aggregates": list }))?;
    } else {
        prov.csv(a.out.as_deref(), |w| metrics::write_aggregate_csv(w, &rows))?;
    }
    Ok(Status::Ok)
}
