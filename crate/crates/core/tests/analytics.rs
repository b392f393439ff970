use artlab_core::analytics::*;
use artlab_core::dataset::{rebalance_split, LabeledDataset, SplitSpec};
use artlab_core::instruments::QuestionKind;
use artlab_core::models::{fit_forest, fit_ordinal, ForestParams, Model, OrdinalParams};
use artlab_core::synth::{generate, KindWeights, SynthParams, SYNTH_KIND_MAP};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Midranks by counting: rank = (#smaller) + (#equal + 1) / 2.
fn oracle_ranks(v: &[f64]) -> Vec<f64> {
    v.iter()
        .map(|a| {
            let less = v.iter().filter(|b| *b < a).count() as f64;
            let equal = v.iter().filter(|b| *b == a).count() as f64;
            less + (equal + 1.0) / 2.0
        })
        .collect()
}

/// Textbook formula with sums of products, no centring pass.
fn oracle_pearson(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let (sx, sy): (f64, f64) = (x.iter().sum(), y.iter().sum());
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| a * b).sum();
    let sxx: f64 = x.iter().map(|a| a * a).sum();
    let syy: f64 = y.iter().map(|b| b * b).sum();
    (n * sxy - sx * sy) / ((n * sxx - sx * sx).sqrt() * (n * syy - sy * sy).sqrt())
}

fn tied_vector(rng: &mut ChaCha8Rng, len: usize) -> Vec<f64> {
    loop {
        let v: Vec<f64> = (0..len).map(|_| rng.random_range(0..6) as f64).collect();
        if v.iter().any(|&a| a != v[0]) {
            return v;
        }
    }
}

#[test]
fn correlations_match_counting_oracles() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..1000 {
        let len = rng.random_range(2..=20);
        let x = tied_vector(&mut rng, len);
        let y = tied_vector(&mut rng, len);
        let r = pearson(&x, &y).unwrap();
        assert!((r - oracle_pearson(&x, &y)).abs() < 1e-12);
        let rho = spearman(&x, &y).unwrap();
        assert!((rho - oracle_pearson(&oracle_ranks(&x), &oracle_ranks(&y))).abs() < 1e-12);
    }
}

#[test]
fn small_correlation_fixtures() {
    let rho = spearman(&[1.0, 2.0, 2.0, 4.0], &[1.0, 3.0, 2.0, 4.0]).unwrap();
    let expected = oracle_pearson(&[1.0, 2.5, 2.5, 4.0], &[1.0, 3.0, 2.0, 4.0]);
    assert!((rho - expected).abs() < 1e-12);
    let r = pearson(&[1.0, 2.0, 3.0, 4.0], &[1.0, 3.0, 2.0, 4.0]).unwrap();
    assert!((r - 0.8).abs() < 1e-12);
    let x = [1.0, 2.0, 3.0, 4.0];
    let down: Vec<f64> = x.iter().map(|v| -2.0 * v + 7.0).collect();
    assert!((pearson(&x, &down).unwrap() + 1.0).abs() < 1e-12);
    assert!(matches!(spearman(&x, &[2.0; 4]), Err(AnalyticsError::ZeroVariance)));
    assert!(matches!(spearman(&x, &[2.0; 3]), Err(AnalyticsError::LengthMismatch { .. })));
}

/// Every K x K matrix with cells in 0..=3, for K = 2 and 3.
fn for_each_matrix(k: usize, mut f: impl FnMut(&[Vec<usize>])) {
    let cells = k * k;
    for code in 0..4usize.pow(cells as u32) {
        let mut c = code;
        let mut m = vec![vec![0; k]; k];
        for i in 0..cells {
            m[i / k][i % k] = c % 4;
            c /= 4;
        }
        f(&m);
    }
}

fn div(a: usize, b: usize) -> Option<f64> {
    if b == 0 {
        None
    } else {
        Some(a as f64 / b as f64)
    }
}

#[test]
fn class_metrics_match_cell_by_cell_oracle() {
    for k in [2, 3] {
        let classes: Vec<u8> = (0..k as u8).map(|c| c * 2).collect();
        for_each_matrix(k, |m| {
            let cm = ConfusionMatrix::from_counts(classes.clone(), m.to_vec()).unwrap();
            let total: usize = m.iter().flatten().sum();
            let diagonal: usize = (0..k).map(|i| m[i][i]).sum();
            assert_eq!(cm.accuracy(), div(diagonal, total));
            for (i, &class) in classes.iter().enumerate() {
                let (mut tp, mut fp, mut fn_, mut tn) = (0, 0, 0, 0);
                for (t, row) in m.iter().enumerate() {
                    for (p, &n) in row.iter().enumerate() {
                        match (t == i, p == i) {
                            (true, true) => tp += n,
                            (false, true) => fp += n,
                            (true, false) => fn_ += n,
                            (false, false) => tn += n,
                        }
                    }
                }
                let precision = div(tp, tp + fp);
                let recall = div(tp, tp + fn_);
                let f1 = match (precision, recall) {
                    (Some(p), Some(r)) if p + r > 0.0 => Some(2.0 * p * r / (p + r)),
                    _ => None,
                };
                let got = class_metrics(&cm, class).unwrap();
                assert_eq!(got.precision, precision);
                assert_eq!(got.recall, recall);
                assert_eq!(got.f1, f1);
                assert_eq!(got.specificity, div(tn, tn + fp));
                assert_eq!(got.support, tp + fn_);
            }
        });
    }
}

#[test]
fn metric_examples() {
    let cm = ConfusionMatrix::from_counts(vec![0, 1], vec![vec![4, 1], vec![2, 3]]).unwrap();
    let m = class_metrics(&cm, 1).unwrap();
    assert_eq!(m.precision, Some(0.75));
    assert_eq!(m.recall, Some(0.6));
    assert!((m.f1.unwrap() - 0.9 / 1.35).abs() < 1e-15);

    let perfect = ConfusionMatrix::from_labels(&[2, 2, 2], &[2, 2, 2], &[]).unwrap();
    let m = class_metrics(&perfect, 2).unwrap();
    assert_eq!((m.precision, m.recall, m.f1), (Some(1.0), Some(1.0), Some(1.0)));

    let absent = ConfusionMatrix::from_labels(&[0, 1], &[0, 1], &[5]).unwrap();
    let m = class_metrics(&absent, 5).unwrap();
    assert_eq!((m.precision, m.recall, m.f1), (None, None, None));
    assert!(matches!(class_metrics(&absent, 3), Err(AnalyticsError::UnknownClass(3))));
    assert_eq!(fmt4(m.precision), "n/a");
}

fn dataset(features: Vec<Vec<f64>>, labels: Vec<u8>) -> LabeledDataset {
    LabeledDataset {
        keys: (0..labels.len()).map(|i| format!("k{i:02}")).collect(),
        features,
        labels,
        kind_map: SYNTH_KIND_MAP.to_vec(),
        target_index: 1,
    }
}

#[test]
fn planted_and_constant_kinds_in_the_table() {
    let labels: Vec<u8> = (0..12).map(|i| (i % 4) as u8).collect();
    let features = labels
        .iter()
        .map(|&l| {
            let mut row = vec![0.0; 12];
            // Analysis marks count up with the label; tracing is constant.
            for (q, v) in row.iter_mut().enumerate().skip(9) {
                *v = f64::from(u8::from(l as usize + 9 > q));
            }
            row[0] = 1.0;
            row[3] = (l % 2) as f64;
            row[6] = f64::from(u8::from(l > 1));
            row
        })
        .collect();
    let table = correlation_table(&dataset(features, labels)).unwrap();
    assert_eq!(table.get(QuestionKind::Analysis), Some(1.0));
    assert_eq!(table.get(QuestionKind::Tracing), None);
    assert!(table.get(QuestionKind::Comparison).unwrap() > 0.0);
    let art = [QuestionKind::Comparison, QuestionKind::Detection, QuestionKind::Analysis]
        .map(|k| table.get(k).unwrap());
    assert!((table.art_average.unwrap() - art.iter().sum::<f64>() / 3.0).abs() < 1e-15);
    let order: Vec<QuestionKind> = table.spearman.iter().map(|(k, _)| *k).collect();
    assert_eq!(order, TABLE_ORDER.to_vec());
}

#[test]
fn generator_kind_ordering_is_recovered() {
    let weights = KindWeights {
        analysis: 3.0,
        comparison: 2.0,
        detection: 1.0,
        tracing: 0.0,
    };
    let mut recovered = 0;
    for seed in 0..10 {
        let cohort = generate(&SynthParams {
            weights,
            pass_rates: [0.6; 12],
            curvature: 1.0,
            comparison_gate: 0.0,
            noise: 1.0,
            weak_students: 0,
            seed,
            ..SynthParams::default()
        })
        .unwrap();
        let d = LabeledDataset::from_records(&cohort.records, &SYNTH_KIND_MAP, 1).unwrap();
        let t = correlation_table(&d).unwrap();
        let rho = |k| t.get(k).unwrap();
        if rho(QuestionKind::Analysis) > rho(QuestionKind::Comparison)
            && rho(QuestionKind::Comparison) > rho(QuestionKind::Detection)
            && rho(QuestionKind::Detection) > rho(QuestionKind::Tracing)
        {
            recovered += 1;
        }
    }
    assert!(recovered >= 9, "ordering recovered in {recovered}/10 seeds");
}

#[test]
fn at_risk_lists_low_predictions_only() {
    let d = dataset(vec![vec![0.0; 12], vec![1.0; 12], vec![2.0; 12]], vec![0, 0, 0]);
    let ordinal = |thresholds: Vec<f64>| {
        Model::Ordinal(artlab_core::models::OrdinalModel {
            classes: (0..7).collect(),
            weights: vec![0.0; 12],
            thresholds,
            l2: 0.1,
        })
    };
    // Every cumulative probability is tiny, so everyone lands on 6.
    assert!(at_risk(&ordinal(vec![-50.0, -49.0, -48.0, -47.0, -46.0, -45.0]), &d).is_empty());

    let x = vec![vec![0.0; 12], vec![1.0; 12], vec![1.0; 12], vec![1.0; 12]];
    let forest = fit_forest(&x, &[1.0, 5.0, 5.0, 5.0], &ForestParams { n_trees: 1, ..Default::default() }).unwrap();
    let list = at_risk(&Model::Forest(forest), &d);
    assert_eq!(
        list,
        vec![AtRisk {
            label: 1,
            student_key: "k00".into()
        }]
    );
}

#[test]
fn planted_weak_students_are_flagged() {
    let mut recalls = Vec::new();
    for seed in 0..10 {
        let cohort = generate(&SynthParams {
            seed,
            ..SynthParams::default()
        })
        .unwrap();
        let d = LabeledDataset::from_records(&cohort.records, &SYNTH_KIND_MAP, 1).unwrap();
        let split = rebalance_split(&d, &SplitSpec::new(0.25, seed)).unwrap();
        let y: Vec<f64> = split.train.labels.iter().map(|&l| l as f64).collect();
        let forest = fit_forest(&split.train.features, &y, &ForestParams { seed, ..Default::default() }).unwrap();
        let model = Model::Forest(forest);
        let flagged = at_risk(&model, &d);
        let hits = cohort
            .weak
            .iter()
            .filter(|id| flagged.iter().any(|r| &r.student_key == *id))
            .count();
        assert_eq!(at_risk(&model, &d), flagged);
        recalls.push(hits as f64 / cohort.weak.len() as f64);
    }
    assert!(recalls.iter().all(|&r| r >= 0.8), "recalls {recalls:?}");
}

#[test]
fn no_signal_means_no_lift_over_majority() {
    for seed in 0..3 {
        let cohort = generate(&SynthParams {
            weights: KindWeights::zero(),
            seed,
            ..SynthParams::default()
        })
        .unwrap();
        let d = LabeledDataset::from_records(&cohort.records, &SYNTH_KIND_MAP, 1).unwrap();
        let total: Vec<f64> = d.features.iter().map(|r| r.iter().sum()).collect();
        let labels: Vec<f64> = d.labels.iter().map(|&l| l as f64).collect();
        assert!(spearman(&total, &labels).unwrap().abs() < 0.2);
        let split = rebalance_split(&d, &SplitSpec::new(0.25, seed)).unwrap();
        let y: Vec<f64> = split.train.labels.iter().map(|&l| l as f64).collect();
        let forest = fit_forest(&split.train.features, &y, &ForestParams { seed, ..Default::default() }).unwrap();
        let predicted: Vec<u8> = split.test.features.iter().map(|x| forest.predict_label(x)).collect();
        let acc = accuracy(&split.test.labels, &predicted).unwrap();
        let hist = split.train.label_histogram();
        let majority = (0..7).max_by_key(|&l| (hist[l], std::cmp::Reverse(l))).unwrap() as u8;
        let baseline = split.test.labels.iter().filter(|&&l| l == majority).count() as f64 / split.test.len() as f64;
        assert!(acc < baseline + 0.1, "seed {seed}: accuracy {acc} vs majority {baseline}");
    }
}

#[test]
fn comparison_dominant_generator_ranks_comparison_first() {
    let mut first = 0;
    for seed in 0..5 {
        let cohort = generate(&SynthParams {
            seed,
            ..SynthParams::default()
        })
        .unwrap();
        let d = LabeledDataset::from_records(&cohort.records, &SYNTH_KIND_MAP, 1).unwrap();
        let y: Vec<f64> = d.labels.iter().map(|&l| l as f64).collect();
        let forest = fit_forest(&d.features, &y, &ForestParams { seed, ..Default::default() }).unwrap();
        let by_kind = importance_by_kind(&forest.importances, &d.kind_map);
        if top_kind(&by_kind) == Some(QuestionKind::Comparison) {
            first += 1;
        }
    }
    assert!(first >= 4, "comparison first in {first}/5 seeds");
}

#[test]
fn report_is_deterministic_and_keyed() {
    let cohort = generate(&SynthParams::default()).unwrap();
    let d = LabeledDataset::from_records(&cohort.records, &SYNTH_KIND_MAP, 1).unwrap();
    let config = TrainConfig {
        splits: vec![SplitSpec::new(0.25, 3), SplitSpec::new(0.3, 3)],
        kinds: vec![artlab_core::models::ModelKind::Forest, artlab_core::models::ModelKind::Ordinal],
        grid: artlab_core::models::HyperGrid {
            n_trees: vec![20],
            max_depth: vec![None],
            min_samples_leaf: vec![1],
            max_features: vec![artlab_core::models::MaxFeatures::All],
            l2: vec![0.1],
            k: 3,
        },
        seed: 3,
    };
    let a = train_and_evaluate(&d, &config).unwrap();
    let b = train_and_evaluate(&d, &config).unwrap();
    assert_eq!(a.report.render_text(), b.report.render_text());
    assert_eq!(a.report.render_kv(), b.report.render_kv());
    assert_eq!(a.report.evaluations.len(), 4);
    let kv = a.report.render_kv();
    for key in [
        "split.75-25.rf.test_accuracy = ",
        "split.70-30.lr.cv_accuracy = ",
        "correlation.spearman.comparison = ",
        "correlation.art_pearson = ",
        "split.75-25.rf.class.0.precision = ",
    ] {
        assert!(kv.contains(key), "missing {key}");
    }
    let text = a.report.render_text();
    assert!(text.contains("75-25") && text.contains("70-30"));
    for e in &a.report.evaluations {
        assert_eq!(e.test_accuracy, e.confusion.accuracy());
        assert!(e.at_risk.iter().all(|r| d.keys.contains(&r.student_key)));
    }
}

#[test]
fn ordinal_model_at_risk_is_stable() {
    let cohort = generate(&SynthParams::default()).unwrap();
    let d = LabeledDataset::from_records(&cohort.records, &SYNTH_KIND_MAP, 1).unwrap();
    let fit = fit_ordinal(&d.features, &d.labels, &OrdinalParams::default()).unwrap();
    let model = Model::Ordinal(fit.model);
    let list = at_risk(&model, &d);
    assert_eq!(list, at_risk(&model, &d));
    assert!(list.windows(2).all(|w| w[0] <= w[1]));
}

proptest! {
    #[test]
    fn spearman_is_symmetric_and_rank_invariant(
        pairs in prop::collection::vec((0u8..5, 0u8..5), 3..20),
    ) {
        let x: Vec<f64> = pairs.iter().map(|p| p.0 as f64).collect();
        let y: Vec<f64> = pairs.iter().map(|p| p.1 as f64).collect();
        prop_assume!(x.iter().any(|&v| v != x[0]) && y.iter().any(|&v| v != y[0]));
        let rho = spearman(&x, &y).unwrap();
        prop_assert_eq!(rho, spearman(&y, &x).unwrap());
        let warped: Vec<f64> = x.iter().map(|v| (v * 0.7).exp() - 3.0).collect();
        prop_assert!((spearman(&warped, &y).unwrap() - rho).abs() < 1e-12);
        prop_assert!((-1.0..=1.0).contains(&rho));
    }

    #[test]
    fn pearson_affine_behaviour(
        pairs in prop::collection::vec((-50i32..50, -50i32..50), 3..20),
        scale in 0.1f64..10.0,
        shift in -100.0f64..100.0,
    ) {
        let x: Vec<f64> = pairs.iter().map(|p| p.0 as f64).collect();
        let y: Vec<f64> = pairs.iter().map(|p| p.1 as f64).collect();
        prop_assume!(x.iter().any(|&v| v != x[0]) && y.iter().any(|&v| v != y[0]));
        let r = pearson(&x, &y).unwrap();
        let up: Vec<f64> = x.iter().map(|v| scale * v + shift).collect();
        let down: Vec<f64> = x.iter().map(|v| -scale * v + shift).collect();
        prop_assert!((pearson(&up, &y).unwrap() - r).abs() < 1e-9);
        prop_assert!((pearson(&down, &y).unwrap() + r).abs() < 1e-9);
    }

    #[test]
    fn accuracy_is_trace_over_total(
        pairs in prop::collection::vec((0u8..7, 0u8..7), 1..60),
    ) {
        let t: Vec<u8> = pairs.iter().map(|p| p.0).collect();
        let p: Vec<u8> = pairs.iter().map(|p| p.1).collect();
        let cm = ConfusionMatrix::from_labels(&t, &p, &[]).unwrap();
        prop_assert_eq!(cm.total(), t.len());
        prop_assert_eq!(Some(accuracy(&t, &p).unwrap()), cm.accuracy());
        for &c in &cm.classes {
            let (tp, fp, fn_, tn) = cm.one_vs_rest(c).unwrap();
            prop_assert_eq!(tp + fp + fn_ + tn, t.len());
        }
    }
}
