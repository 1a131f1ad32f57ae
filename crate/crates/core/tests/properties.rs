use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use softsensor::dataset::{Dataset, Features, FEATURE_NAMES};
use softsensor::evaluation::{mae, rmse};
use softsensor::interpretation::{partial_dependence, smooth_curve, GridSpec};
use softsensor::models::{
    fit_forest, fit_tree, ForestParams, LinearModel, RegressionModel, TreeNode, TreeParams,
};

fn dataset(max_rows: usize) -> impl Strategy<Value = (Vec<Features>, Vec<f64>)> {
    (8..max_rows).prop_flat_map(|n| {
        (
            prop::collection::vec(prop::array::uniform8(-3.0f64..3.0), n),
            prop::collection::vec(-2.0f64..2.0, n),
        )
    })
}

/// Open interval (lo, hi] each feature may move within without leaving the leaf.
fn leaf_box(tree: &TreeNode, x: &Features) -> [(f64, f64); 8] {
    let mut bounds = [(f64::NEG_INFINITY, f64::INFINITY); 8];
    let mut node = tree;
    while let TreeNode::Split { feature, threshold, left, right } = node {
        if x[*feature] <= *threshold {
            bounds[*feature].1 = bounds[*feature].1.min(*threshold);
            node = left;
        } else {
            bounds[*feature].0 = bounds[*feature].0.max(*threshold);
            node = right;
        }
    }
    bounds
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn tree_is_piecewise_constant((x, y) in dataset(60), seed: u64, row in 0usize..8, j in 0usize..8, t in 0.0f64..1.0) {
        let params = TreeParams { mtry: 3, min_leaf_size: 2, max_depth: None };
        let tree = fit_tree(&x, &y, &params, &mut ChaCha8Rng::seed_from_u64(seed));
        let r = x[row];
        let (lo, hi) = leaf_box(&tree, &r)[j];
        let lo = lo.max(-10.0);
        let hi = hi.min(10.0);
        let mut moved = r;
        moved[j] = hi - t * (hi - lo) * 0.999;
        prop_assert!(moved[j] > lo && moved[j] <= hi);
        prop_assert_eq!(tree.predict(&moved), tree.predict(&r));
    }

    #[test]
    fn forest_is_mean_of_trees((x, y) in dataset(80), seed: u64) {
        let data = Dataset::from_rows(&x, &y).unwrap();
        let forest = fit_forest(&data, &ForestParams { n_trees: 7, ..Default::default() }, seed).unwrap();
        for r in &x {
            let mean = forest.trees.iter().map(|t| t.predict(r)).sum::<f64>() / 7.0;
            prop_assert!((forest.predict(r) - mean).abs() <= 1e-12);
        }
    }

    #[test]
    fn affine_model_gives_affine_curve(
        (x, y) in dataset(50),
        w in prop::array::uniform8(-2.0f64..2.0),
        b in -1.0f64..1.0,
        j in 0usize..8,
    ) {
        let data = Dataset::from_rows(&x, &y).unwrap();
        let model = RegressionModel::Linear(LinearModel { weights: w, intercept: b });
        let curve = partial_dependence(&model, &data, FEATURE_NAMES[j], &GridSpec::Quantiles(20)).unwrap();
        for k in 1..curve.grid.len() {
            let slope = (curve.values[k] - curve.values[0]) / (curve.grid[k] - curve.grid[0]);
            prop_assert!((slope - w[j]).abs() < 1e-8);
        }
    }

    #[test]
    fn forest_curve_within_prediction_range((x, y) in dataset(60), seed: u64, j in 0usize..8) {
        let data = Dataset::from_rows(&x, &y).unwrap();
        let forest = fit_forest(&data, &ForestParams { n_trees: 5, ..Default::default() }, seed).unwrap();
        let model = RegressionModel::RandomForest(forest);
        let curve = partial_dependence(&model, &data, FEATURE_NAMES[j], &GridSpec::Quantiles(15)).unwrap();
        for (g, v) in curve.grid.iter().zip(&curve.values) {
            let preds: Vec<f64> = x.iter().map(|r| { let mut m = *r; m[j] = *g; model.predict(&m) }).collect();
            let lo = preds.iter().cloned().fold(f64::INFINITY, f64::min);
            let hi = preds.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            prop_assert!(*v >= lo - 1e-12 && *v <= hi + 1e-12);
        }
    }

    #[test]
    fn smoothing_preserves_length_and_range(v in prop::collection::vec(-5.0f64..5.0, 1..120), half in 0usize..15) {
        let window = (2 * half + 1).min(if v.len() % 2 == 1 { v.len() } else { v.len() - 1 });
        let s = smooth_curve(&v, window).unwrap();
        prop_assert_eq!(s.len(), v.len());
        let lo = v.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = v.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        prop_assert!(s.iter().all(|x| *x >= lo - 1e-12 && *x <= hi + 1e-12));
        let flat = smooth_curve(&vec![v[0]; v.len()], window).unwrap();
        prop_assert!(flat.iter().all(|x| (x - v[0]).abs() < 1e-12));
    }

    #[test]
    fn rmse_equals_mae_for_equal_absolute_errors(
        t in prop::collection::vec(-10.0f64..10.0, 1..100),
        c in 0.0f64..3.0,
        signs in prop::collection::vec(any::<bool>(), 100),
    ) {
        let p: Vec<f64> = t.iter().zip(&signs).map(|(v, s)| if *s { v + c } else { v - c }).collect();
        prop_assert!((rmse(&t, &p).unwrap() - mae(&t, &p).unwrap()).abs() < 1e-9);
    }
}

#[test]
fn rmse_exceeds_mae_for_unequal_errors() {
    let t = [0.0, 0.0, 0.0];
    let p = [1.0, 1.0, 4.0];
    assert!(rmse(&t, &p).unwrap() > mae(&t, &p).unwrap() + 0.1);
}
