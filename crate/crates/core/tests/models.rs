use artlab_core::models::*;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn labels_as_f64(y: &[u8]) -> Vec<f64> {
    y.iter().map(|&v| v as f64).collect()
}

#[test]
fn eight_row_tree_matches_hand_run() {
    // Root SSE 45.5. Feature 0 leaves SSE 1 + 4, feature 1 leaves 16 + 25, so
    // feature 0 wins; each half then splits on feature 1.
    let x = vec![
        vec![0.0, 0.0],
        vec![0.0, 1.0],
        vec![0.0, 0.0],
        vec![0.0, 1.0],
        vec![1.0, 0.0],
        vec![1.0, 1.0],
        vec![1.0, 0.0],
        vec![1.0, 1.0],
    ];
    let y = [0.0, 1.0, 0.0, 1.0, 4.0, 6.0, 4.0, 6.0];
    let tree = fit_tree(&x, &y, &TreeParams::default(), 0).unwrap();
    let leaf = |value: f64| Box::new(TreeNode::Leaf { value, samples: 2 });
    let expected = TreeNode::Split {
        feature: 0,
        threshold: 0.5,
        decrease: (45.5 - 5.0) / 8.0,
        left: Box::new(TreeNode::Split {
            feature: 1,
            threshold: 0.5,
            decrease: 1.0 / 8.0,
            left: leaf(0.0),
            right: leaf(1.0),
        }),
        right: Box::new(TreeNode::Split {
            feature: 1,
            threshold: 0.5,
            decrease: 4.0 / 8.0,
            left: leaf(4.0),
            right: leaf(6.0),
        }),
    };
    assert_eq!(tree, expected);

    let shallow = fit_tree(
        &x,
        &y,
        &TreeParams {
            max_depth: Some(1),
            ..TreeParams::default()
        },
        0,
    )
    .unwrap();
    assert_eq!(shallow.depth(), 1);
    assert_eq!(shallow.predict(&[1.0, 0.0]), 5.0);
}

#[test]
fn min_samples_leaf_is_respected() {
    let x: Vec<Vec<f64>> = (0..10).map(|i| vec![i as f64]).collect();
    let y: Vec<f64> = (0..10).map(|i| (i * i) as f64).collect();
    let tree = fit_tree(
        &x,
        &y,
        &TreeParams {
            min_samples_leaf: 3,
            ..TreeParams::default()
        },
        0,
    )
    .unwrap();
    fn check(node: &TreeNode) {
        match node {
            TreeNode::Leaf { samples, .. } => assert!(*samples >= 3),
            TreeNode::Split { left, right, .. } => {
                check(left);
                check(right);
            }
        }
    }
    check(&tree);
    assert!(fit_tree(&[], &[], &TreeParams::default(), 0).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn unlimited_tree_fits_distinct_rows(rows in prop::collection::btree_set(prop::collection::vec(0u8..3, 4), 1..30), seed in any::<u64>()) {
        let x: Vec<Vec<f64>> = rows.iter().map(|r| r.iter().map(|&v| v as f64).collect()).collect();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let y: Vec<f64> = x.iter().map(|_| rng.random_range(0..7) as f64).collect();
        let tree = fit_tree(&x, &y, &TreeParams::default(), seed).unwrap();
        for (row, target) in x.iter().zip(&y) {
            prop_assert_eq!(tree.predict(row), *target);
        }
    }
}

#[test]
fn constant_target_has_no_importance() {
    let x: Vec<Vec<f64>> = (0..20).map(|i| vec![(i % 2) as f64, (i % 3) as f64]).collect();
    let forest = fit_forest(&x, &[2.0; 20], &ForestParams::default()).unwrap();
    assert!(!forest.has_splits());
    assert_eq!(forest.importances, vec![0.0, 0.0]);
    assert_eq!(forest.predict_label(&[0.0, 1.0]), 2);
}

fn planted(seed: u64, n: usize) -> (Vec<Vec<f64>>, Vec<u8>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let x: Vec<Vec<f64>> = (0..n)
        .map(|_| (0..12).map(|_| f64::from(rng.random_bool(0.5))).collect())
        .collect();
    let y = x.iter().map(|r| if r[3] == 1.0 { 6 } else { 0 }).collect();
    (x, y)
}

#[test]
fn planted_feature_dominates_importance() {
    let (x, y) = planted(5, 120);
    let forest = fit_forest(
        &x,
        &labels_as_f64(&y),
        &ForestParams {
            n_trees: 200,
            seed: 11,
            ..ForestParams::default()
        },
    )
    .unwrap();
    let top = (0..12).max_by(|&a, &b| forest.importances[a].total_cmp(&forest.importances[b])).unwrap();
    assert_eq!(top, 3);
    assert!((forest.importances.iter().sum::<f64>() - 1.0).abs() < 1e-9);
    assert!(forest.importances.iter().all(|&v| v >= 0.0));
}

#[test]
fn forest_is_deterministic_and_averages_trees() {
    let (x, y) = planted(8, 60);
    let y: Vec<f64> = y.iter().zip(&x).map(|(&l, r)| l as f64 * 0.5 + r[0] + r[7]).collect();
    let params = ForestParams {
        n_trees: 25,
        tree: TreeParams {
            max_features: MaxFeatures::Sqrt,
            ..TreeParams::default()
        },
        seed: 99,
    };
    let a = fit_forest(&x, &y, &params).unwrap();
    let b = fit_forest(&x, &y, &params).unwrap();
    assert_eq!(save_model(&Model::Forest(a.clone())), save_model(&Model::Forest(b)));
    for row in &x {
        let mut total = 0.0;
        for tree in &a.trees {
            total += tree.predict(row);
        }
        assert_eq!(a.predict(row), total / a.trees.len() as f64);
    }
    let other = fit_forest(&x, &y, &ForestParams { seed: 100, ..params }).unwrap();
    assert_ne!(a.trees, other.trees);
}

#[test]
fn swapping_columns_swaps_importances() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let x: Vec<Vec<f64>> = (0..80).map(|_| (0..4).map(|_| rng.random::<f64>()).collect()).collect();
    let y: Vec<f64> = x.iter().map(|r| 3.0 * r[0] + r[2] * r[2] + 0.5 * r[3]).collect();
    let swapped: Vec<Vec<f64>> = x.iter().map(|r| vec![r[2], r[1], r[0], r[3]]).collect();
    // Equal-score splits go to the lower column, so leaves stay big enough
    // that two columns never produce the same partition.
    let params = ForestParams {
        n_trees: 20,
        tree: TreeParams {
            max_depth: Some(4),
            min_samples_leaf: 5,
            ..TreeParams::default()
        },
        seed: 1,
    };
    let a = fit_forest(&x, &y, &params).unwrap().importances;
    let b = fit_forest(&swapped, &y, &params).unwrap().importances;
    for (i, j) in [(0, 2), (1, 1), (2, 0), (3, 3)] {
        assert!((a[i] - b[j]).abs() < 1e-12, "{a:?} vs {b:?}");
    }
}

#[test]
fn forest_rounds_half_up() {
    let leaf = |value| TreeNode::Leaf { value, samples: 1 };
    let forest = |values: &[f64]| Forest {
        params: ForestParams::default(),
        n_features: 1,
        trees: values.iter().map(|&v| leaf(v)).collect(),
        importances: vec![0.0],
    };
    assert_eq!(forest(&[4.0, 4.0, 4.0]).predict_label(&[0.0]), 4);
    assert_eq!(forest(&[3.0, 4.0]).predict_label(&[0.0]), 4);
    assert_eq!(forest(&[2.0, 2.0, 3.0, 3.0]).predict_label(&[1.0]), 3);
}

fn random_instance(rng: &mut ChaCha8Rng) -> (Vec<Vec<f64>>, Vec<u8>, usize) {
    let n = rng.random_range(5..15);
    let p = rng.random_range(1..4);
    let k = rng.random_range(2..5u8);
    let x: Vec<Vec<f64>> = (0..n).map(|_| (0..p).map(|_| rng.random_range(-2.0..2.0)).collect()).collect();
    let mut y: Vec<u8> = (0..n).map(|_| rng.random_range(0..k)).collect();
    y[0] = 0;
    y[1] = k - 1;
    (x, y, p)
}

#[test]
fn ordinal_gradient_matches_finite_differences() {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    for _ in 0..50 {
        let (x, y, _) = random_instance(&mut rng);
        let l2 = rng.random_range(0.0..1.0);
        let problem = OrdinalProblem::new(&x, &y, l2).unwrap();
        let params: Vec<f64> = (0..problem.dimension()).map(|_| rng.random_range(-1.0..1.0)).collect();
        let analytic = problem.gradient(&params);
        let h = 1e-5;
        let numeric: Vec<f64> = (0..params.len())
            .map(|i| {
                let mut up = params.clone();
                let mut down = params.clone();
                up[i] += h;
                down[i] -= h;
                (problem.objective(&up) - problem.objective(&down)) / (2.0 * h)
            })
            .collect();
        let diff: f64 = analytic.iter().zip(&numeric).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt();
        let scale: f64 = analytic.iter().map(|a| a * a).sum::<f64>().sqrt().max(1e-8);
        assert!(diff / scale < 1e-4, "relative error {}", diff / scale);
    }
}

#[test]
fn ordinal_probabilities_are_coherent() {
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    for _ in 0..20 {
        let (x, y, _) = random_instance(&mut rng);
        let fit = fit_ordinal(&x, &y, &OrdinalParams::default()).unwrap();
        assert!(fit.model.thresholds.windows(2).all(|w| w[0] < w[1]));
        for row in &x {
            let cumulative = fit.model.cumulative(row);
            assert!(cumulative.windows(2).all(|w| w[0] <= w[1]));
            let total: f64 = fit.model.class_probabilities(row).iter().sum();
            assert!((total - 1.0).abs() < 1e-12);
        }
    }
}

#[test]
fn ordinal_predictions_rise_with_the_feature() {
    let x: Vec<Vec<f64>> = (0..70).map(|i| vec![(i % 7) as f64]).collect();
    let y: Vec<u8> = (0..70)
        .map(|i| {
            let v = (i % 7) as u8;
            if i % 5 == 0 { v.saturating_sub(1) } else { v }
        })
        .collect();
    let fit = fit_ordinal(&x, &y, &OrdinalParams::default()).unwrap();
    let predictions: Vec<u8> = (0..=60).map(|i| fit.model.predict_label(&[i as f64 / 10.0])).collect();
    assert!(predictions.windows(2).all(|w| w[0] <= w[1]), "{predictions:?}");
    assert!(predictions[0] < predictions[60]);
}

#[test]
fn grid_of_one_returns_its_point() {
    let (x, y) = planted(1, 40);
    let grid = HyperGrid {
        n_trees: vec![5],
        max_depth: vec![Some(2)],
        min_samples_leaf: vec![1],
        max_features: vec![MaxFeatures::All],
        l2: vec![0.1],
        k: 4,
    };
    let cv = grid_search_cv(&x, &y, &grid, ModelKind::Forest, 0).unwrap();
    assert_eq!(cv.scores.len(), 1);
    assert_eq!(cv.best, cv.scores[0].0);
    assert_eq!(cv.best_accuracy, 1.0);
    let again = grid_search_cv(&x, &y, &grid, ModelKind::Forest, 0).unwrap();
    assert_eq!(cv, again);
    let lr = grid_search_cv(&x, &y, &grid, ModelKind::Ordinal, 0).unwrap();
    assert_eq!(lr.scores.len(), 1);
    assert!(matches!(
        grid_search_cv(&x[..3], &y[..3], &grid, ModelKind::Forest, 0),
        Err(ModelError::TooFewRows { rows: 3, k: 4 })
    ));
}

#[test]
fn deeper_trees_win_on_layered_target() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let x: Vec<Vec<f64>> = (0..90)
        .map(|_| (0..3).map(|_| f64::from(rng.random_bool(0.5))).collect())
        .collect();
    let y: Vec<u8> = x.iter().map(|r| (r[0] + 2.0 * r[1] + 3.0 * r[2]) as u8).collect();
    let grid = HyperGrid {
        n_trees: vec![10],
        max_depth: vec![Some(1), Some(2), None],
        min_samples_leaf: vec![1],
        max_features: vec![MaxFeatures::All],
        l2: vec![],
        k: 5,
    };
    let cv = grid_search_cv(&x, &y, &grid, ModelKind::Forest, 9).unwrap();
    match cv.best {
        GridPoint::Forest(p) => assert_eq!(p.tree.max_depth, None),
        other => panic!("unexpected {other:?}"),
    }
    assert!(cv.scores[0].1 < cv.scores[2].1);
}

#[test]
fn saved_models_predict_identically() {
    let (x, y) = planted(21, 50);
    let forest = fit_forest(
        &x,
        &labels_as_f64(&y).iter().zip(&x).map(|(v, r)| v * 0.7 + r[1]).collect::<Vec<_>>(),
        &ForestParams {
            n_trees: 7,
            seed: 3,
            ..ForestParams::default()
        },
    )
    .unwrap();
    let ordinal = fit_ordinal(&x, &y, &OrdinalParams::default()).unwrap().model;
    for model in [Model::Forest(forest), Model::Ordinal(ordinal)] {
        let text = save_model(&model);
        let loaded = load_model(&text).unwrap();
        assert_eq!(loaded, model);
        assert_eq!(save_model(&loaded), text);
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        for _ in 0..100 {
            let row: Vec<f64> = (0..12).map(|_| rng.random_range(-1.0..2.0)).collect();
            assert_eq!(loaded.predict_label(&row), model.predict_label(&row));
        }
    }
}

#[test]
fn damaged_model_files_are_rejected() {
    let (x, y) = planted(2, 30);
    let text = save_model(&Model::Ordinal(fit_ordinal(&x, &y, &OrdinalParams::default()).unwrap().model));
    assert!(matches!(
        load_model(&text.replace("artlab-model 1", "artlab-model 9")),
        Err(ModelError::Format { line: 1, .. })
    ));
    assert!(matches!(load_model(&text.replace("weights", "weight")), Err(ModelError::Format { line: 6, .. })));
    assert!(load_model("").is_err());
    assert!(load_model(&format!("{text}junk\n")).is_err());
}
