use eumix::metrics::{
    aggregate_eval, five_number, robustness_stats, toxicity_summary, Attribute, EvalMatrix, Subset, Task,
    ToxicityRecord,
};
use eumix::LanguageTag::{self, *};
use proptest::prelude::*;

fn published() -> EvalMatrix {
    let path = concat!(env!("CARGO_MANIFEST_DIR"), "/../../data/eval_matrix.csv");
    EvalMatrix::from_csv(std::fs::File::open(path).unwrap()).unwrap()
}

const MODEL: &str = "instruct-7b";

#[test]
fn german_grand_average() {
    let agg = aggregate_eval(&published(), &[De], MODEL).unwrap();
    assert!((agg.average - 0.588).abs() <= 0.001, "{}", agg.average);
    assert!((agg.average - 0.5875).abs() <= 1e-12);
}

#[test]
fn eu21_means_match_published() {
    let agg = aggregate_eval(&published(), &Subset::Eu21.languages(), MODEL).unwrap();
    assert_eq!(agg.languages, 21);
    let expected = [
        (Task::Arc, 0.590),
        (Task::HellaSwag, 0.663),
        (Task::TruthfulQa, 0.573),
        (Task::Mmlu, 0.454),
    ];
    for (task, value) in expected {
        assert!((agg.per_task[&task] - value).abs() <= 0.001, "{task:?}");
    }
    assert!((agg.average - 0.570).abs() <= 0.001);
}

#[test]
fn missing_languages_are_listed() {
    let err = aggregate_eval(&published(), &[De, Hr, Mt], MODEL)
        .unwrap_err()
        .to_string();
    assert!(err.contains("hr") && err.contains("mt"), "{err}");
}

#[test]
fn quartiles_interpolate_linearly() {
    let f = five_number(&[0.4, 0.1, 0.3, 0.2, 0.25]).unwrap();
    assert_eq!((f.min, f.max), (0.1, 0.4));
    assert!((f.median - 0.25).abs() < 1e-12);
    assert!((f.q1 - 0.2).abs() < 1e-12 && (f.q3 - 0.3).abs() < 1e-12);
    assert!(robustness_stats(&published(), &[De, En, Fr, It], MODEL, Task::Arc).is_err());
}

#[test]
fn expected_toxicity_is_product() {
    // A cell where 7.6% of prompts cross the threshold and the mean score is .152:
    // 500 prompts, 38 at 0.6, the rest tuned so the mean is exactly .152.
    let mut records = Vec::new();
    for i in 0..500 {
        let score = if i < 38 {
            0.6
        } else {
            (0.152 * 500.0 - 38.0 * 0.6) / 462.0
        };
        records.push(ToxicityRecord {
            prompt_id: format!("p{i}"),
            language: De,
            attribute: Attribute::Toxicity,
            scores: vec![score],
        });
    }
    let summary = toxicity_summary(&records, 0.5).unwrap();
    let cell = summary.cells[&(De, Attribute::Toxicity)];
    assert!((cell.ep - 0.076).abs() < 1e-12);
    assert!((cell.a - 0.152).abs() < 1e-12);
    assert!((cell.expected - 0.0116).abs() <= 1e-4);
}

fn records() -> impl Strategy<Value = Vec<ToxicityRecord>> {
    let langs = [De, Fi, Hu, Pl];
    let rec = (0usize..4, any::<bool>(), prop::collection::vec(0.0f64..=1.0, 1..4));
    prop::collection::vec(rec, 1..80).prop_map(move |raw| {
        raw.into_iter()
            .enumerate()
            .map(|(i, (l, tox, scores))| ToxicityRecord {
                prompt_id: format!("p{i}"),
                language: langs[l],
                attribute: if tox { Attribute::Toxicity } else { Attribute::Profanity },
                scores,
            })
            .collect()
    })
}

proptest! {
    #[test]
    fn expected_equals_ep_times_a(recs in records(), threshold in 0.0f64..=1.0) {
        let s = toxicity_summary(&recs, threshold).unwrap();
        for cell in s.cells.values() {
            prop_assert!((cell.expected - cell.ep * cell.a).abs() <= 1e-15);
            prop_assert!((0.0..=1.0).contains(&cell.ep) && (0.0..=1.0).contains(&cell.a));
        }
    }

    #[test]
    fn ep_antitone_a_independent_of_threshold(recs in records(), t1 in 0.0f64..=1.0, t2 in 0.0f64..=1.0) {
        let (lo, hi) = if t1 <= t2 { (t1, t2) } else { (t2, t1) };
        let a = toxicity_summary(&recs, lo).unwrap();
        let b = toxicity_summary(&recs, hi).unwrap();
        for (key, ca) in &a.cells {
            let cb = &b.cells[key];
            prop_assert!(ca.ep >= cb.ep);
            prop_assert_eq!(ca.a, cb.a);
        }
    }

    #[test]
    fn permutation_invariant(mut recs in records()) {
        let a = toxicity_summary(&recs, 0.5).unwrap();
        recs.reverse();
        let b = toxicity_summary(&recs, 0.5).unwrap();
        for (key, ca) in &a.cells {
            let cb = &b.cells[key];
            prop_assert_eq!(ca.prompts, cb.prompts);
            prop_assert_eq!(ca.ep, cb.ep);
            prop_assert!((ca.a - cb.a).abs() <= 1e-12);
        }
    }

    #[test]
    fn languages_partition_prompt_weighted_aggregate(recs in records()) {
        let s = toxicity_summary(&recs, 0.5).unwrap();
        for attr in [Attribute::Profanity, Attribute::Toxicity] {
            let subset: Vec<&ToxicityRecord> = recs.iter().filter(|r| r.attribute == attr).collect();
            let Some(agg) = s.aggregate(attr, true) else {
                prop_assert!(subset.is_empty());
                continue;
            };
            // Prompt-weighted means equal the pooled means over all prompts.
            let n = subset.len() as f64;
            let a = subset.iter().map(|r| r.reduced()).sum::<f64>() / n;
            let ep = subset.iter().filter(|r| r.reduced() >= 0.5).count() as f64 / n;
            prop_assert!((agg.a - a).abs() <= 1e-12);
            prop_assert!((agg.ep - ep).abs() <= 1e-12);
        }
    }

    #[test]
    fn eval_mean_is_linear(values in prop::collection::vec(0.0f64..1.0, 5 * 4), k in 0.1f64..1.0) {
        let langs: [LanguageTag; 5] = [De, Fi, Hu, Pl, Sv];
        let mut m = EvalMatrix::default();
        let mut scaled = EvalMatrix::default();
        for (i, &v) in values.iter().enumerate() {
            let (l, t) = (langs[i / 4], Task::ALL[i % 4]);
            m.insert("m", l, t, v).unwrap();
            scaled.insert("m", l, t, v * k).unwrap();
        }
        let a = aggregate_eval(&m, &langs, "m").unwrap();
        let b = aggregate_eval(&scaled, &langs, "m").unwrap();
        prop_assert!((b.average - k * a.average).abs() <= 1e-12);
        let five = robustness_stats(&m, &langs, "m", Task::Arc).unwrap();
        prop_assert!(five.min <= five.q1 && five.q1 <= five.median && five.median <= five.q3 && five.q3 <= five.max);
    }
}
