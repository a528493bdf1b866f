mod common;

use common::*;
use infection_risk::boosting::{
    train_adaboost_traced, train_gbt, train_gbt_traced, AdaBoostConfig, GbtConfig, GrowthPolicy,
};
use infection_risk::data::Matrix;
use infection_risk::linear::{
    logistic_predict_proba, train_logistic, train_logistic_traced, GdConfig,
};
use infection_risk::neighbors::KnnModel;
use infection_risk::neural::{
    mlp_gradients, mlp_loss, train_mlp, Layer, MlpArchitecture, MlpParams, MlpTrainConfig,
};
use infection_risk::trees::{
    find_best_split, train_decision_tree, train_random_forest, ForestConfig, TreeConfig,
};
use proptest::prelude::*;
use rand::Rng;

const SEEDS: [u64; 5] = [42, 43, 44, 45, 46];

fn accuracy(p: impl Fn(&[f64]) -> u8, x: &Matrix, y: &[u8]) -> f64 {
    x.iter_rows().zip(y).filter(|(r, &t)| p(r) == t).count() as f64 / y.len() as f64
}

// ---- linear ----

#[test]
fn logistic_loss_never_increases_with_small_steps() {
    let p = prepared(4000, 42);
    for lr in [0.1, 0.05, 0.01] {
        let cfg = GdConfig {
            learning_rate: lr,
            epochs: 300,
            ..Default::default()
        };
        let (_, history) = train_logistic_traced(&p.x_train, &p.y_train, &cfg).unwrap();
        assert!(history.windows(2).all(|w| w[1] <= w[0]), "lr {lr}");
    }
}

#[test]
fn logistic_is_invariant_to_feature_scaling() {
    // Mirror pairs (x, y) and (−x, 1−y) keep the bias gradient at zero, so
    // only the weights feel the rescaled step size.
    let mut r = rng(11);
    let mut rows = Vec::new();
    let mut y = Vec::new();
    for _ in 0..10 {
        let x: Vec<f64> = (0..3).map(|_| r.random_range(-2.0..2.0)).collect();
        let label = u8::from(x[0] + 0.5 * x[1] + r.random_range(-1.0..1.0) > 0.0);
        y.push(label);
        rows.push(x.clone());
        y.push(1 - label);
        rows.push(x.iter().map(|v| -v).collect());
    }
    let x = Matrix::from_rows(&rows);
    let base = GdConfig {
        learning_rate: 0.1,
        epochs: 400,
        l2_lambda: 1e-2,
        ..Default::default()
    };
    let model = train_logistic(&x, &y, &base).unwrap();
    for c in [0.5, 3.0, 10.0] {
        let scaled = Matrix::from_rows(
            &rows
                .iter()
                .map(|r| r.iter().map(|v| v * c).collect::<Vec<_>>())
                .collect::<Vec<_>>(),
        );
        let cfg = GdConfig {
            learning_rate: base.learning_rate / (c * c),
            l2_lambda: base.l2_lambda * c * c,
            ..base.clone()
        };
        let m2 = train_logistic(&scaled, &y, &cfg).unwrap();
        for (row, srow) in x.iter_rows().zip(scaled.iter_rows()) {
            let a = logistic_predict_proba(&model, row).unwrap();
            let b = logistic_predict_proba(&m2, srow).unwrap();
            assert!((a - b).abs() < 1e-8, "c={c}: {a} vs {b}");
        }
    }
}

// ---- trees ----

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn accepted_splits_never_increase_impurity(
        rows in prop::collection::vec((prop::collection::vec(-3.0..3.0f64, 3), 0u8..=1), 2..60),
        min_leaf in 1usize..4,
    ) {
        let x = Matrix::from_rows(&rows.iter().map(|(r, _)| r.clone()).collect::<Vec<_>>());
        let y: Vec<u8> = rows.iter().map(|(_, t)| *t).collect();
        if let Some(s) = find_best_split(&x, &y, &[0, 1, 2], min_leaf) {
            prop_assert!(s.impurity_decrease >= 0.0);
            let left = (0..y.len()).filter(|&i| x.get(i, s.feature_index) < s.threshold).count();
            prop_assert!(left >= min_leaf && y.len() - left >= min_leaf);
        }
    }

    #[test]
    fn knn_probability_is_a_multiple_of_one_over_k(k in 1usize..12, seed in 0u64..1000) {
        let mut r = rng(seed);
        let x = random_matrix(&mut r, 30, 4);
        let y = random_labels(&mut r, 30);
        let model = KnnModel::new(x, y, k).unwrap();
        let q: Vec<f64> = (0..4).map(|_| r.random_range(-2.0..2.0)).collect();
        let p = model.predict_proba(&q).unwrap();
        let scaled = p * k as f64;
        prop_assert!((scaled - scaled.round()).abs() < 1e-12 && (0.0..=1.0).contains(&p));
    }
}

#[test]
fn forest_probability_is_member_mean() {
    let p = prepared(800, 3);
    let forest = train_random_forest(
        &p.x_train,
        &p.y_train,
        &ForestConfig {
            n_trees: 15,
            ..Default::default()
        },
    )
    .unwrap();
    for row in p.x_test.iter_rows().take(50) {
        let mean = forest
            .trees
            .iter()
            .map(|t| t.predict_proba(row).unwrap())
            .sum::<f64>()
            / 15.0;
        assert!((forest.predict_proba(row).unwrap() - mean).abs() < 1e-12);
    }
}

#[test]
fn forest_is_not_worse_than_a_single_tree() {
    for seed in SEEDS {
        let p = prepared(4000, seed);
        let tree = train_decision_tree(&p.x_train, &p.y_train, &TreeConfig::default()).unwrap();
        let forest = train_random_forest(
            &p.x_train,
            &p.y_train,
            &ForestConfig {
                seed,
                ..Default::default()
            },
        )
        .unwrap();
        let t = accuracy(
            |r| u8::from(tree.predict_proba(r).unwrap() >= 0.5),
            &p.x_test,
            &p.y_test,
        );
        let f = accuracy(|r| forest.predict_class(r).unwrap(), &p.x_test, &p.y_test);
        assert!(f >= t - 0.02, "seed {seed}: forest {f} vs tree {t}");
    }
}

// ---- boosting ----

#[test]
fn gbt_training_loss_never_increases() {
    let p = prepared(4000, 42);
    for lr in [0.01, 0.1, 0.3] {
        for growth in [
            GrowthPolicy::DepthWise { max_depth: 4 },
            GrowthPolicy::LeafWise { max_leaves: 12 },
        ] {
            let cfg = GbtConfig {
                learning_rate: lr,
                n_rounds: 60,
                growth,
                ..Default::default()
            };
            let (_, losses) = train_gbt_traced(&p.x_train, &p.y_train, &cfg).unwrap();
            assert_eq!(losses.len(), 61);
            assert!(
                losses.windows(2).all(|w| w[1] <= w[0]),
                "lr {lr} {growth:?}"
            );
        }
    }
}

#[test]
fn raising_min_child_weight_never_adds_splits() {
    let p = prepared(4000, 42);
    for growth in [
        GrowthPolicy::DepthWise { max_depth: 6 },
        GrowthPolicy::LeafWise { max_leaves: 32 },
    ] {
        let mut previous = usize::MAX;
        for mcw in [0.0, 1.0, 5.0, 10.0, 20.0, 50.0, 100.0, 400.0, 1000.0] {
            let cfg = GbtConfig {
                n_rounds: 1,
                min_child_weight: mcw,
                growth,
                ..Default::default()
            };
            let splits = train_gbt(&p.x_train, &p.y_train, &cfg).unwrap().trees[0].n_splits();
            assert!(
                splits <= previous,
                "{growth:?} mcw {mcw}: {splits} > {previous}"
            );
            previous = splits;
        }
        assert_eq!(
            previous, 0,
            "800 is more than the whole hessian mass at p = 0.5"
        );
    }
}

#[test]
fn adaboost_weights_stay_a_distribution() {
    let p = prepared(2000, 7);
    let (ensemble, rounds) =
        train_adaboost_traced(&p.x_train, &p.y_train, &AdaBoostConfig::default()).unwrap();
    assert_eq!(ensemble.len(), rounds.len());
    for r in &rounds {
        let total: f64 = r.weights.iter().sum();
        assert!((total - 1.0).abs() <= 1e-12);
        assert!(r.weights.iter().all(|&w| w >= 0.0));
        assert!(r.weighted_error < 0.5 && r.alpha > 0.0);
    }
}

#[test]
fn single_split_trees_agree_across_growth_policies() {
    for seed in [1, 2, 3] {
        let p = prepared(1000, seed);
        let depth = GbtConfig {
            n_rounds: 1,
            growth: GrowthPolicy::DepthWise { max_depth: 1 },
            ..Default::default()
        };
        let leaves = GbtConfig {
            growth: GrowthPolicy::LeafWise { max_leaves: 2 },
            ..depth.clone()
        };
        let a = train_gbt(&p.x_train, &p.y_train, &depth).unwrap();
        let b = train_gbt(&p.x_train, &p.y_train, &leaves).unwrap();
        assert_eq!(a.trees, b.trees);
    }
}

// ---- neural ----

#[test]
fn gradient_vanishes_when_outputs_match_labels() {
    let arch = MlpArchitecture::new(vec![3, 4, 1]);
    let mut params = MlpParams::zeros(&arch);
    params.layers[1].bias[0] = 40.0;
    let x = Matrix::from_rows(&[[0.1, 0.2, 0.3], [1.0, -1.0, 0.5]]);
    let (_, g) = mlp_gradients(&params, &x, &[1, 1], &[0, 1]).unwrap();
    assert!(g.flatten().iter().all(|v| v.abs() <= 1e-10));
}

#[test]
fn duplicated_batch_has_the_same_mean_gradient() {
    let mut r = rng(21);
    let arch = MlpArchitecture::default();
    let params = MlpParams::init(&arch, 5);
    let x = random_matrix(&mut r, 12, 7);
    let y = random_labels(&mut r, 12);
    let once: Vec<usize> = (0..12).collect();
    let twice: Vec<usize> = once.iter().chain(&once).copied().collect();
    let (l1, g1) = mlp_gradients(&params, &x, &y, &once).unwrap();
    let (l2, g2) = mlp_gradients(&params, &x, &y, &twice).unwrap();
    assert!((l1 - l2).abs() < 1e-12);
    for (a, b) in g1.flatten().iter().zip(g2.flatten()) {
        assert!((a - b).abs() < 1e-12);
    }
}

#[test]
fn mlp_memorizes_32_points() {
    let mut r = rng(32);
    let x = random_matrix(&mut r, 32, 7);
    let y = random_labels(&mut r, 32);
    let cfg = MlpTrainConfig {
        epochs: 2000,
        learning_rate: 1e-2,
        batch_size: 8,
        ..Default::default()
    };
    let (params, trace) = train_mlp(&x, &y, None, &MlpArchitecture::default(), &cfg).unwrap();
    let rows: Vec<usize> = (0..32).collect();
    let loss = mlp_loss(&params, &x, &y, &rows).unwrap();
    assert!(loss < 0.05, "final loss {loss}");
    assert_eq!(trace.entries.len(), 2000);
    assert_eq!(trace.entries.last().unwrap().train_acc, 1.0);
}

#[test]
fn mlp_ignores_training_row_order() {
    let p = prepared(600, 9);
    let n = p.y_train.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.reverse();
    order.rotate_left(17);
    let x2 = p.x_train.select_rows(&order);
    let y2: Vec<u8> = order.iter().map(|&i| p.y_train[i]).collect();
    let cfg = MlpTrainConfig {
        epochs: 5,
        ..Default::default()
    };
    let arch = MlpArchitecture::default();
    let (a, _) = train_mlp(&p.x_train, &p.y_train, None, &arch, &cfg).unwrap();
    let (b, _) = train_mlp(&x2, &y2, None, &arch, &cfg).unwrap();
    let (c, _) = train_mlp(&p.x_train, &p.y_train, None, &arch, &cfg).unwrap();
    assert_eq!(a, b);
    assert_eq!(a, c);
}

#[test]
fn mlp_trace_tracks_validation_and_outputs_stay_open() {
    let p = prepared(1000, 4);
    let cfg = MlpTrainConfig {
        epochs: 20,
        ..Default::default()
    };
    let (params, trace) = train_mlp(
        &p.x_train,
        &p.y_train,
        Some((&p.x_test, &p.y_test)),
        &MlpArchitecture::default(),
        &cfg,
    )
    .unwrap();
    assert_eq!(trace.entries.len(), 20);
    assert!(trace
        .entries
        .iter()
        .all(|e| e.val_loss.is_some() && e.val_acc.is_some()));
    let csv = trace.to_csv();
    assert!(csv.starts_with("epoch,train_loss,train_acc,val_loss,val_acc\n1,"));
    assert_eq!(csv.lines().count(), 21);
    for row in p.x_test.iter_rows() {
        let prob = params.predict_proba(row).unwrap();
        assert!(prob > 0.0 && prob < 1.0);
    }
    let extreme = vec![1e6; 7];
    let prob = params.predict_proba(&extreme).unwrap();
    assert!(prob > 0.0 && prob < 1.0);
}

#[test]
fn mlp_gradients_reject_bad_shapes() {
    let params = MlpParams {
        layers: vec![Layer {
            inputs: 2,
            outputs: 1,
            weights: vec![0.0; 2],
            bias: vec![0.0],
        }],
    };
    let x = Matrix::from_rows(&[[0.0, 1.0, 2.0]]);
    assert!(mlp_gradients(&params, &x, &[1], &[0]).is_err());
    let x = Matrix::from_rows(&[[0.0, 1.0]]);
    assert!(mlp_gradients(&params, &x, &[1], &[]).is_err());
}

// ---- neighbors ----

#[test]
fn leave_one_out_never_returns_the_held_out_point() {
    let mut r = rng(12);
    let x = random_matrix(&mut r, 150, 7);
    let y = random_labels(&mut r, 150);
    let model = KnnModel::new(x.clone(), y, 1).unwrap();
    for i in 0..150 {
        let nn = model.neighbors(x.row(i), Some(i)).unwrap();
        assert_ne!(nn[0], i);
        let others: Vec<usize> = (0..150).filter(|&j| j != i).collect();
        let expected = naive_knn(&x.select_rows(&others), x.row(i), 1)[0];
        assert_eq!(nn[0], others[expected]);
    }
}
