//! Acceptance suite: one PASS/FAIL line per criterion, each checked against
//! its runtime budget. Exits non-zero if any criterion fails.

use std::collections::{BTreeMap, HashMap};
use std::path::{Path, PathBuf};
use std::process::Command;
use std::time::{Duration, Instant};

use eumix::ablation::{read_evals_csv, score_vs_baseline, time_normalize, EvalTriple, RunLog};
use eumix::bpe::{train_bpe, train_on_texts, Pretokenize, TrainerConfig, Vocab};
use eumix::corpus::{
    read_stats_csv, validate_stats, CountUnit, Document, Source, StatsField, TokenCounter, WhitespaceWords,
};
use eumix::fertility::{compare_tokenizers, fertility, ParallelCorpus};
use eumix::metrics::{aggregate_eval, toxicity_summary, Attribute, EvalMatrix, Subset, Task, ToxicityRecord};
use eumix::mixer::{execute_plan, plan_mixture, realized_distribution};
use eumix::packer::{pack_samples, plan_packs, PackConfig, PackItem, PackingPolicy, TokenizedSample};
use eumix::schedule::{lr_at, ScheduleSpec, ScheduleVariant};
use eumix::selection::{
    apply_oversampling, cosine_distance, normalize_scores, preference_score, select, DatasetConfig, SelectionConfig,
    Weights,
};
use eumix::synth::Synth;
use eumix::LanguageTag::{self, *};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Check = Result<String, String>;
type Criterion = (&'static str, Duration, fn() -> Check);

macro_rules! ensure {
    ($cond:expr, $($msg:tt)+) => {
        if !$cond {
            return Err(format!($($msg)+));
        }
    };
}

fn workspace() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("../..")
        .canonicalize()
        .unwrap()
}

fn data(name: &str) -> PathBuf {
    workspace().join("data").join(name)
}

fn err<E: std::fmt::Display>(e: E) -> String {
    e.to_string()
}

fn corpus_stats() -> Check {
    let file = std::fs::File::open(data("token_table.csv")).map_err(err)?;
    let stats = read_stats_csv(file, CountUnit::Tokens).map_err(err)?;
    let bg = stats.rows.iter().find(|r| r.lang == Bg).ok_or("no bg row")?;
    let share = bg.curated_tokens as f64 / (bg.curated_tokens + bg.web_tokens) as f64 * 100.0;
    ensure!((share - 47.13).abs() <= 0.01, "bg curated share {share:.4}");
    let flagged = validate_stats(&stats);
    let de = flagged
        .iter()
        .find(|d| d.row == "de" && d.field == StatsField::TotalTokens)
        .ok_or("de total not flagged")?;
    ensure!(
        de.recomputed == 349_081e6 && de.declared == 470_396e6,
        "de flagged as {} vs {}",
        de.recomputed,
        de.declared
    );
    Ok(format!(
        "bg share {share:.2}%, de total {:.0}M vs {:.0}M flagged",
        de.recomputed / 1e6,
        de.declared / 1e6
    ))
}

fn multiscript(rng: &mut ChaCha8Rng) -> String {
    const PIECES: &[&str] = &[
        "a",
        "e",
        "ä",
        "ö",
        "ő",
        "ş",
        "ž",
        "ł",
        "ą",
        "é",
        "ç",
        "ñ",
        "ß",
        "th",
        "sch",
        "α",
        "ά",
        "ς",
        "Ω",
        "λόγος",
        "ж",
        "щ",
        "ъ",
        "Я",
        "мир",
        " ",
        "  ",
        "\t",
        "\n",
        ".",
        ",",
        "’",
        "€",
        "x",
        "Q",
        "1",
    ];
    let n = rng.gen_range(0..40);
    (0..n).map(|_| *PIECES.choose(rng).unwrap()).collect()
}

fn bpe_properties() -> Check {
    let synth = Synth::new(11);
    let mut docs: Vec<Document> = [Bg, De, El, Fi, Hu, Pl]
        .iter()
        .flat_map(|&l| synth.documents(l, Source::Web, 12))
        .collect();
    let config = TrainerConfig {
        vocab_size: 700,
        per_language_quota: 10,
        seed: 3,
        ..TrainerConfig::default()
    };
    let vocab = train_bpe(&docs, &config).map_err(err)?;
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    let n = 10_000;
    for _ in 0..n {
        let s = multiscript(&mut rng);
        let back = vocab.decode(vocab.encode(&s).ids()).map_err(err)?;
        ensure!(back == s, "roundtrip failed for {s:?}");
    }

    let first = vocab.to_json().map_err(err)?;
    docs.reverse();
    let second = train_bpe(&docs, &config).map_err(err)?.to_json().map_err(err)?;
    ensure!(first == second, "same seed produced different vocabularies");

    let tiny = train_on_texts(
        &["ab ab ab"],
        &TrainerConfig {
            vocab_size: 256 + 3 + 1,
            pretokenize: Pretokenize::WhitespaceSplit,
            ..TrainerConfig::default()
        },
    )
    .map_err(err)?;
    let (l, r) = tiny.merges()[0];
    ensure!(
        tiny.token_bytes(l) == Some(b"a") && tiny.token_bytes(r) == Some(b"b"),
        "first merge of \"ab ab ab\" is not (a, b)"
    );
    Ok(format!(
        "{n} multiscript roundtrips, {} merges deterministic, (a,b) merged first",
        vocab.merge_count()
    ))
}

fn fertility_check() -> Check {
    let bytes = Vocab::bytes_only(3, Pretokenize::WhitespaceSplit).map_err(err)?;
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let words = ["ab", "öß", "κόσμε", "мир", "x", "szó", "ääk"];
    for _ in 0..200 {
        let texts: Vec<String> = (0..rng.gen_range(1..20))
            .map(|_| {
                let n = rng.gen_range(1..12);
                (0..n)
                    .map(|_| *words.choose(&mut rng).unwrap())
                    .collect::<Vec<_>>()
                    .join(" ")
            })
            .collect();
        let f = fertility(&bytes, &texts).map_err(err)?;
        let t: u64 = texts.iter().map(|s| s.len() as u64).sum();
        let w: u64 = texts.iter().map(|s| s.split_whitespace().count() as u64).sum();
        ensure!(
            f.tokens == t && f.words == w,
            "oracle mismatch: {}/{} vs {t}/{w}",
            f.tokens,
            f.words
        );
        ensure!(f.ratio == t as f64 / w as f64, "ratio mismatch");
    }

    let synth = Synth::new(42);
    let langs = [En, De, Fi, Hu];
    let docs: Vec<Document> = langs
        .iter()
        .flat_map(|&l| synth.documents(l, Source::Web, 60))
        .collect();
    let train = |quota, languages: Vec<LanguageTag>| {
        train_bpe(
            &docs,
            &TrainerConfig {
                vocab_size: 1000,
                per_language_quota: quota,
                languages,
                seed: 1,
                ..TrainerConfig::default()
            },
        )
    };
    let balanced = train(30, Vec::new()).map_err(err)?;
    let english = train(60, vec![En]).map_err(err)?;
    let corpus = ParallelCorpus::new(synth.parallel(&langs, 300)).map_err(err)?;
    let report = compare_tokenizers(&[("balanced", &balanced), ("english", &english)], &corpus).map_err(err)?;
    let mut detail = Vec::new();
    for lang in [De, Fi, Hu] {
        let b = report.get(lang, "balanced").ok_or("missing row")?.fertility;
        let e = report.get(lang, "english").ok_or("missing row")?.fertility;
        ensure!(b <= e, "{lang}: balanced {b:.3} > english-only {e:.3}");
        detail.push(format!("{lang} {b:.2}<={e:.2}"));
    }
    Ok(format!("oracle exact on 200 fixtures; {}", detail.join(", ")))
}

fn mixer_check() -> Check {
    let langs = [De, En, Fi, Fr, Pl];
    let synth = Synth::new(9);
    let docs: Vec<Document> = langs
        .iter()
        .flat_map(|&l| synth.documents(l, Source::Web, 200))
        .collect();
    let mut available: BTreeMap<LanguageTag, u64> = BTreeMap::new();
    for d in &docs {
        *available.entry(d.language).or_default() += WhitespaceWords.count_tokens(&d.text);
    }
    let pool: u64 = available.values().sum();
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut worst: f64 = 0.0;
    let trials = 12;
    for trial in 0..trials {
        let weights: Vec<f64> = (0..5).map(|_| rng.gen_range(1.0..100.0)).collect();
        let total: f64 = weights.iter().sum();
        let mut shares: Vec<f64> = weights.iter().map(|w| (w / total * 1000.0).round() / 10.0).collect();
        shares[0] += 100.0 - shares.iter().sum::<f64>();
        let shares: BTreeMap<LanguageTag, f64> = langs.iter().copied().zip(shares).collect();
        let budget = (pool as f64 * rng.gen_range(0.3..3.0)) as u64;
        let plan = plan_mixture(&available, &shares, budget).map_err(err)?;
        let out = execute_plan(&plan, &docs, &WhitespaceWords, trial).map_err(err)?;
        let realized = realized_distribution(&out.documents, &WhitespaceWords);
        for (lang, target) in &shares {
            let got = realized.get(lang).copied().unwrap_or(0.0);
            worst = worst.max((got - target).abs());
            ensure!(
                (got - target).abs() <= 0.5,
                "trial {trial} {lang}: {got:.3} vs {target}"
            );
        }
        if trial == 0 {
            let again = execute_plan(&plan, &docs, &WhitespaceWords, trial).map_err(err)?;
            ensure!(again == out, "same seed produced a different mixture");
        }
    }

    let fi: Vec<Document> = docs.iter().filter(|d| d.language == Fi).cloned().collect();
    let fi_total = available[&Fi];
    let plan = plan_mixture(
        &BTreeMap::from([(Fi, fi_total)]),
        &BTreeMap::from([(Fi, 100.0)]),
        2 * fi_total,
    )
    .map_err(err)?;
    let out = execute_plan(&plan, &fi, &WhitespaceWords, 0).map_err(err)?;
    let mut counts: HashMap<&str, usize> = HashMap::new();
    for d in &out.documents {
        *counts.entry(d.id.as_str()).or_default() += 1;
    }
    ensure!(
        counts.len() == fi.len() && counts.values().all(|&n| n == 2),
        "factor 2.0 did not duplicate every document exactly twice"
    );
    Ok(format!(
        "{trials} random plans, worst share error {worst:.3}pp; deterministic; factor 2 exact"
    ))
}

fn selection_check() -> Check {
    let synth = Synth::new(3);
    let samples = synth.instruction_samples(&[("sigma", 300), ("sigma_evolved", 200)], &[De, En, Fi], 16);
    let norm = normalize_scores(&samples).map_err(err)?;
    let fold = |f: fn(&eumix::selection::InstructionSample) -> f64| {
        samples
            .iter()
            .map(f)
            .fold((f64::MAX, f64::MIN), |(l, h), v| (l.min(v), h.max(v)))
    };
    let (qlo, qhi) = fold(|s| s.raw_quality);
    let (clo, chi) = fold(|s| s.raw_complexity);
    for (i, s) in samples.iter().enumerate() {
        let hand = 0.7 * ((s.raw_quality - qlo) / (qhi - qlo)) + 0.3 * ((s.raw_complexity - clo) / (chi - clo));
        let p = preference_score(norm.quality[i], norm.complexity[i], &Weights::default()).map_err(err)?;
        ensure!((p - hand).abs() <= 1e-12, "{}: {p} vs {hand}", s.id);
    }

    let mut checked_pairs = 0usize;
    for min_distance in [0.05, 0.1, 0.2, 0.4] {
        let cfg = SelectionConfig {
            datasets: ["sigma", "sigma_evolved"]
                .iter()
                .map(|d| {
                    (
                        d.to_string(),
                        DatasetConfig {
                            min_distance,
                            ..DatasetConfig::default()
                        },
                    )
                })
                .collect(),
            ..SelectionConfig::default()
        };
        let sel = select(&samples, &cfg).map_err(err)?;
        for ds in ["sigma", "sigma_evolved"] {
            let kept: Vec<&[f64]> = sel
                .samples
                .iter()
                .filter(|s| s.item.sample.dataset == ds)
                .map(|s| s.item.sample.embedding.as_slice())
                .collect();
            for i in 0..kept.len() {
                for j in i + 1..kept.len() {
                    let d = cosine_distance(kept[i], kept[j]);
                    ensure!(d >= min_distance - 1e-12, "{ds}: pair at distance {d} < {min_distance}");
                    checked_pairs += 1;
                }
            }
        }
    }

    let aware = synth.instruction_samples(&[("self_awareness", 113)], &[De], 8);
    let copies = apply_oversampling(&aware, 10).map_err(err)?.len();
    ensure!(copies == 1130, "113 x 10 gave {copies}");
    Ok(format!(
        "preference exact, {checked_pairs} pairs >= min_distance, 113x10 = {copies}"
    ))
}

fn packing_check() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let trials = 1000;
    for trial in 0..trials {
        let capacity = rng.gen_range(16..1024);
        let samples: Vec<TokenizedSample> = (0..rng.gen_range(0..60))
            .map(|i| {
                let ins = rng.gen_range(0..capacity / 2);
                let resp = rng.gen_range(1..capacity / 2);
                TokenizedSample {
                    id: format!("s{i}"),
                    instruction: (0..ins as u32).collect(),
                    response: (0..resp as u32).map(|t| t + 1_000_000).collect(),
                }
            })
            .collect();
        let policy = if trial % 2 == 0 {
            PackingPolicy::FirstFitDecreasing
        } else {
            PackingPolicy::Sequential
        };
        let packs = pack_samples(
            &samples,
            &PackConfig {
                capacity,
                policy,
                truncate_response: false,
            },
        )
        .map_err(err)?;
        let mut seen = vec![0usize; samples.len()];
        let mut tokens = 0;
        let mut true_bits = 0;
        for pack in &packs {
            ensure!(pack.filled() <= capacity, "trial {trial}: pack overflows");
            for seg in &pack.segments {
                let i: usize = seg.sample_id[1..].parse().map_err(err)?;
                seen[i] += 1;
                let s = &samples[i];
                ensure!(
                    seg.token_ids[..s.instruction.len()] == s.instruction[..]
                        && seg.token_ids[s.instruction.len()..] == s.response[..],
                    "trial {trial}: tokens of {} altered",
                    s.id
                );
                tokens += seg.token_ids.len();
                true_bits += seg.loss_mask.iter().filter(|&&m| m).count();
            }
        }
        ensure!(seen.iter().all(|&n| n == 1), "trial {trial}: sample lost or duplicated");
        let expect: usize = samples.iter().map(|s| s.instruction.len() + s.response.len()).sum();
        ensure!(tokens == expect, "trial {trial}: token count {tokens} vs {expect}");
        let resp: usize = samples.iter().map(|s| s.response.len()).sum();
        ensure!(
            true_bits == resp,
            "trial {trial}: {true_bits} mask bits vs {resp} response tokens"
        );
    }

    let items: Vec<PackItem> = [1000, 900, 800, 300]
        .iter()
        .enumerate()
        .map(|(i, &n)| PackItem {
            id: format!("f{i}"),
            instruction_len: n / 4,
            response_len: n - n / 4,
        })
        .collect();
    let n = plan_packs(&items, 2048, PackingPolicy::FirstFitDecreasing)
        .map_err(err)?
        .len();
    ensure!(n == 2, "FFD fixture gave {n} packs");
    Ok(format!(
        "{trials} randomized trials conserved, no overflow, masks exact; FFD fixture -> {n} packs"
    ))
}

fn schedule_check() -> Check {
    let rel = |got: f64, want: f64, what: &str| -> Result<(), String> {
        ensure!((got - want).abs() <= 1e-12 * want, "{what}: {got:e} vs {want:e}");
        Ok(())
    };
    let base = ScheduleSpec::default();
    rel(lr_at(&base, 0).map_err(err)?, 3e-5, "step 0")?;
    rel(lr_at(&base, 10_000).map_err(err)?, 3e-4, "step 10000")?;
    let decay = ScheduleSpec::with_variant(ScheduleVariant::ContinueDecay);
    rel(
        lr_at(&decay, decay.end_step()).map_err(err)?,
        1.5e-5,
        "continue-decay terminal",
    )?;
    let partial = ScheduleSpec::with_variant(ScheduleVariant::PartialRewarmup);
    rel(
        lr_at(&partial, partial.warmup_steps).map_err(err)?,
        7.5e-5,
        "partial-rewarmup peak",
    )?;
    Ok("3e-5 @0, 3e-4 @10k, continue-decay -> 1.5e-5, partial peak 7.5e-5".into())
}

fn ablation_check() -> Check {
    let base = RunLog::new("base", 1.0, vec![(0, 3.0), (1000, 2.5)]).map_err(err)?;
    let run = RunLog::new("run", 0.8, vec![(0, 3.0), (1000, 2.4)]).map_err(err)?;
    let s = time_normalize(&run, &base).map_err(err)?.samples[1].0;
    ensure!((s - 1250.0).abs() <= 1e-9, "normalized step {s}");

    let entries = read_evals_csv(std::fs::File::open(data("ablation_evals.csv")).map_err(err)?).map_err(err)?;
    let eval = |name: &str| {
        entries
            .iter()
            .find(|e| e.run == name)
            .and_then(|e| e.eval)
            .ok_or(format!("no {name}"))
    };
    let baseline = eval("baseline")?;
    ensure!(
        baseline == EvalTriple::new(0.535, 0.355, 0.503).map_err(err)?,
        "baseline row differs"
    );
    let adan = score_vs_baseline(&eval("Adan")?, &baseline);
    ensure!(
        (adan.arc_easy, adan.hellaswag, adan.lambada) == (true, true, true),
        "Adan marks {adan:?}"
    );
    let swiglu = score_vs_baseline(&eval("SwiGLU")?, &baseline);
    ensure!(
        (swiglu.arc_easy, swiglu.hellaswag, swiglu.lambada) == (false, true, true),
        "SwiGLU marks {swiglu:?}"
    );
    Ok(format!(
        "s'={s}, Adan {}/3, SwiGLU {}/3 better",
        adan.n_better, swiglu.n_better
    ))
}

fn metrics_check() -> Check {
    let matrix = EvalMatrix::from_csv(std::fs::File::open(data("eval_matrix.csv")).map_err(err)?).map_err(err)?;
    let model = "instruct-7b";
    let de = aggregate_eval(&matrix, &[De], model).map_err(err)?.average;
    ensure!((de - 0.588).abs() <= 0.001, "German average {de}");
    let eu21 = aggregate_eval(&matrix, &Subset::Eu21.languages(), model).map_err(err)?;
    let arc = eu21.per_task[&Task::Arc];
    ensure!(
        eu21.languages == 21 && (arc - 0.590).abs() <= 0.001,
        "EU21-ARC mean {arc}"
    );

    // 500 prompts: 38 (7.6%) at 0.6, the rest sized so the mean score is .152.
    let rest = (0.152 * 500.0 - 38.0 * 0.6) / 462.0;
    let records: Vec<ToxicityRecord> = (0..500)
        .map(|i| ToxicityRecord {
            prompt_id: format!("p{i}"),
            language: De,
            attribute: Attribute::Toxicity,
            scores: vec![if i < 38 { 0.6 } else { rest }],
        })
        .collect();
    let cell = toxicity_summary(&records, 0.5).map_err(err)?.cells[&(De, Attribute::Toxicity)];
    ensure!(
        (cell.expected - 0.0116).abs() <= 1e-4,
        "expected toxicity {}",
        cell.expected
    );
    Ok(format!(
        "de avg {de:.4}, EU21-ARC {arc:.4}, EP {:.3} x A {:.3} = {:.4}",
        cell.ep, cell.a, cell.expected
    ))
}

/// Every subcommand, mirroring `scripts/demo.sh`. `{o}` is the output directory.
const PIPELINE: &[&str] = &[
    "corpus stats --out {o}/stats.csv",
    "corpus validate --table {o}/stats.csv --out {o}/stats_check.csv",
    "tok train --out {o}/vocab.json",
    "tok train --languages en --quota 60 --out {o}/vocab_en.json",
    "tok encode --vocab {o}/vocab.json --input data/demo/parallel/de.txt --out {o}/de_ids.jsonl",
    "fertility --tokenizer balanced={o}/vocab.json --tokenizer english={o}/vocab_en.json --out {o}/fertility.csv",
    "mix plan --availability {o}/stats.csv --out {o}/plan.json",
    "mix run --plan {o}/plan.json --out {o}/mixed.jsonl --report {o}/mix_outcomes.csv",
    "select --out {o}/selected.jsonl --report {o}/selection.csv",
    "pack --input {o}/selected.jsonl --vocab {o}/vocab.json --out {o}/packs.jsonl --report {o}/packs.csv",
    "schedule preview --variant cosine-warmup --out {o}/schedule_cosine.csv",
    "schedule preview --variant continue-decay --out {o}/schedule_decay.csv",
    "schedule preview --variant full-rewarmup --out {o}/schedule_full.csv",
    "schedule preview --variant partial-rewarmup --out {o}/schedule_partial.csv",
    "ablate normalize --out {o}/ablation_losses.csv --curves {o}/ablation_curves.csv",
    "ablate score --out {o}/ablation.md",
    "metrics tox --out {o}/toxicity.csv",
    "metrics eval --out {o}/eval.csv",
    "metrics eval --robustness --subset eu21 --out {o}/robustness.csv",
];

fn run_pipeline(out: &Path) -> Result<(), String> {
    let o = out.to_str().ok_or("non-UTF-8 temp path")?;
    for step in PIPELINE {
        let args: Vec<String> = step.split(' ').map(|a| a.replace("{o}", o)).collect();
        let status = Command::new(env!("CARGO_BIN_EXE_eumix"))
            .current_dir(workspace())
            .args(["--config", "data/demo.toml"])
            .args(&args)
            .output()
            .map_err(err)?;
        ensure!(
            status.status.success(),
            "`eumix {step}` failed: {}",
            String::from_utf8_lossy(&status.stderr).trim()
        );
    }
    Ok(())
}

fn cli_determinism() -> Check {
    // Both passes write to the same path so that path-valued arguments, and
    // hence the provenance config hashes, agree.
    let tmp = tempfile::tempdir().map_err(err)?;
    let out = tmp.path().join("out");
    let first = tmp.path().join("first");
    run_pipeline(&out)?;
    std::fs::rename(&out, &first).map_err(err)?;
    run_pipeline(&out)?;

    let mut names: Vec<_> = std::fs::read_dir(&first)
        .map_err(err)?
        .map(|e| e.map(|e| e.file_name()))
        .collect::<Result<_, _>>()
        .map_err(err)?;
    names.sort();
    ensure!(names.len() >= PIPELINE.len(), "only {} outputs written", names.len());
    for name in &names {
        let a = std::fs::read(first.join(name)).map_err(err)?;
        let b = std::fs::read(out.join(name)).map_err(|e| format!("{name:?}: {e}"))?;
        ensure!(a == b, "{name:?} differs between runs");
    }
    Ok(format!(
        "{} subcommand runs, {} outputs byte-identical",
        PIPELINE.len(),
        names.len()
    ))
}

fn main() {
    let criteria: [Criterion; 10] = [
        ("corpus stats", Duration::from_secs(1), corpus_stats),
        ("bpe properties", Duration::from_secs(30), bpe_properties),
        ("fertility", Duration::from_secs(60), fertility_check),
        ("mixer", Duration::from_secs(30), mixer_check),
        ("selection", Duration::from_secs(10), selection_check),
        ("packing", Duration::from_secs(30), packing_check),
        ("schedules", Duration::from_secs(1), schedule_check),
        ("ablation bench", Duration::from_secs(1), ablation_check),
        ("metrics", Duration::from_secs(1), metrics_check),
        ("cli determinism", Duration::from_secs(120), cli_determinism),
    ];
    let mut failed = 0;
    for (i, (name, limit, check)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let result = check();
        let elapsed = start.elapsed();
        let result = match result {
            Ok(detail) if elapsed > *limit => Err(format!("{detail}; exceeded {limit:?}")),
            other => other,
        };
        match result {
            Ok(detail) => println!("PASS [{}] {name}: {detail} ({:.2}s)", i + 1, elapsed.as_secs_f64()),
            Err(detail) => {
                failed += 1;
                println!("FAIL [{}] {name}: {detail} ({:.2}s)", i + 1, elapsed.as_secs_f64());
            }
        }
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
