use std::collections::BTreeMap;

use eumix::selection::{
    apply_oversampling, cosine_distance, diversity_filter, normalize_scores, preference_score, select, Candidate,
    DatasetConfig, InstructionSample, SelectionConfig, Weights,
};
use eumix::synth::Synth;
use eumix::LanguageTag::*;
use proptest::prelude::*;
use rand::{seq::SliceRandom, SeedableRng};

fn sample(id: usize, dataset: &str, q: f64, c: f64, embedding: Vec<f64>) -> InstructionSample {
    InstructionSample {
        id: format!("{dataset}-{id:04}"),
        instruction: "q".into(),
        response: "a".into(),
        language: De,
        dataset: dataset.into(),
        raw_quality: q,
        raw_complexity: c,
        embedding,
    }
}

/// Scores on a 1/8 grid keep min-max arithmetic exact under the affine maps used below.
fn samples() -> impl Strategy<Value = Vec<InstructionSample>> {
    let row = (0u32..80, 0u32..80, prop::collection::vec(-4i32..=4, 4));
    prop::collection::vec(row, 2..60).prop_map(|rows| {
        rows.into_iter()
            .enumerate()
            .map(|(i, (q, c, e))| {
                let mut e: Vec<f64> = e.into_iter().map(f64::from).collect();
                if e.iter().all(|&x| x == 0.0) {
                    e[0] = 1.0;
                }
                sample(i, if i % 3 == 0 { "a" } else { "b" }, q as f64 / 8.0, c as f64 / 8.0, e)
            })
            .collect()
    })
}

fn config(min_distance: f64, quota: Option<usize>) -> SelectionConfig {
    let ds = DatasetConfig {
        sample_size: quota,
        min_distance,
        oversample_factor: 1,
    };
    SelectionConfig {
        datasets: BTreeMap::from([("a".into(), ds.clone()), ("b".into(), ds)]),
        ..SelectionConfig::default()
    }
}

fn selected_ids(samples: &[InstructionSample], config: &SelectionConfig) -> Vec<String> {
    select(samples, config)
        .unwrap()
        .samples
        .into_iter()
        .map(|s| s.item.sample.id)
        .collect()
}

proptest! {
    #[test]
    fn preference_matches_hand_arithmetic(samples in samples()) {
        let norm = normalize_scores(&samples).unwrap();
        let (qlo, qhi) = samples.iter().fold((f64::MAX, f64::MIN), |(l, h), s| (l.min(s.raw_quality), h.max(s.raw_quality)));
        let (clo, chi) = samples.iter().fold((f64::MAX, f64::MIN), |(l, h), s| (l.min(s.raw_complexity), h.max(s.raw_complexity)));
        for (i, s) in samples.iter().enumerate() {
            let q = if qhi > qlo { (s.raw_quality - qlo) / (qhi - qlo) } else { 0.5 };
            let c = if chi > clo { (s.raw_complexity - clo) / (chi - clo) } else { 0.5 };
            let p = preference_score(norm.quality[i], norm.complexity[i], &Weights::default()).unwrap();
            prop_assert!((p - (0.7 * q + 0.3 * c)).abs() <= 1e-12);
            prop_assert!((0.0..=1.0).contains(&p));
        }
    }

    #[test]
    fn filtered_output_is_pairwise_far(samples in samples(), min_distance in 0.01f64..1.5) {
        let sel = select(&samples, &config(min_distance, None)).unwrap();
        for ds in ["a", "b"] {
            let kept: Vec<&Vec<f64>> = sel.samples.iter()
                .filter(|s| s.item.sample.dataset == ds)
                .map(|s| &s.item.sample.embedding)
                .collect();
            for i in 0..kept.len() {
                for j in i + 1..kept.len() {
                    let d = cosine_distance(kept[i], kept[j]);
                    // Unit-vector and raw-vector dot products may differ in the last bits.
                    prop_assert!(d >= min_distance - 1e-12, "{d} < {min_distance}");
                }
            }
        }
    }

    #[test]
    fn greedy_rejects_only_close_candidates(samples in samples(), min_distance in 0.01f64..1.5) {
        let candidates: Vec<Candidate<'_>> = samples.iter().map(|s| Candidate { id: &s.id, embedding: &s.embedding }).collect();
        let kept = diversity_filter(&candidates, min_distance, usize::MAX).unwrap();
        for (i, c) in candidates.iter().enumerate() {
            if kept.contains(&i) {
                continue;
            }
            // Every rejection is justified by an earlier accepted candidate.
            let blocked = kept.iter().filter(|&&k| k < i).any(|&k| cosine_distance(candidates[k].embedding, c.embedding) < min_distance + 1e-12);
            prop_assert!(blocked, "candidate {i} rejected without a close predecessor");
        }
    }

    #[test]
    fn stable_under_input_order(samples in samples(), seed in any::<u64>(), quota in 1usize..20) {
        let cfg = config(0.2, Some(quota));
        let mut shuffled = samples.clone();
        shuffled.shuffle(&mut rand_chacha::ChaCha8Rng::seed_from_u64(seed));
        prop_assert_eq!(selected_ids(&samples, &cfg), selected_ids(&shuffled, &cfg));
    }

    #[test]
    fn invariant_under_positive_affine_rescaling(samples in samples(), quota in 1usize..20) {
        let cfg = config(0.2, Some(quota));
        let mut scaled = samples.clone();
        for s in &mut scaled {
            s.raw_quality = 4.0 * s.raw_quality - 3.0;
            s.raw_complexity = 0.5 * s.raw_complexity + 16.0;
        }
        prop_assert_eq!(selected_ids(&samples, &cfg), selected_ids(&scaled, &cfg));
    }
}

#[test]
fn oversampling_113_by_10_yields_1130() {
    let samples = Synth::new(1).instruction_samples(&[("self_awareness", 113)], &[De, En], 8);
    assert_eq!(samples.len(), 113);
    let copies = apply_oversampling(&samples, 10).unwrap();
    assert_eq!(copies.len(), 1130);
    for (i, chunk) in copies.chunks(10).enumerate() {
        assert!(chunk.iter().all(|c| c.item.id == samples[i].id));
        assert_eq!(
            chunk.iter().map(|c| c.copy).collect::<Vec<_>>(),
            (0..10).collect::<Vec<_>>()
        );
    }

    let cfg = SelectionConfig {
        datasets: BTreeMap::from([(
            "self_awareness".into(),
            DatasetConfig {
                oversample_factor: 10,
                ..DatasetConfig::default()
            },
        )]),
        ..SelectionConfig::default()
    };
    let sel = select(&samples, &cfg).unwrap();
    assert_eq!(sel.samples.len(), 1130);
    assert_eq!(sel.report[0].selected, 113);
}

#[test]
fn hand_computed_preference() {
    let samples = vec![
        sample(0, "a", 1.0, 10.0, vec![1.0]),
        sample(1, "a", 3.0, 30.0, vec![1.0]),
        sample(2, "a", 2.0, 10.0, vec![1.0]),
    ];
    let sel = select(&samples, &config(0.0, None)).unwrap();
    let p: Vec<(String, f64)> = sel
        .samples
        .iter()
        .map(|s| (s.item.sample.id.clone(), s.item.preference))
        .collect();
    assert_eq!(p[0].0, "a-0001");
    assert!((p[0].1 - 1.0).abs() <= 1e-12);
    assert_eq!(p[1].0, "a-0002");
    assert!((p[1].1 - 0.35).abs() <= 1e-12);
    assert!((p[2].1 - 0.0).abs() <= 1e-12);
}
