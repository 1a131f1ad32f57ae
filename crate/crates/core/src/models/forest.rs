//! Bagged regression forests with per-tree out-of-bag bookkeeping.

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::tree::{TreeBuilder, TreeNode, TreeParams};
use crate::dataset::{Dataset, Features, N_FEATURES};
use crate::error::{Error, Result};
use crate::seeds::{derive_seed, rng_from};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ForestParams {
    pub n_trees: usize,
    pub mtry: usize,
    pub min_leaf_size: usize,
    pub max_depth: Option<usize>,
}

impl Default for ForestParams {
    fn default() -> Self {
        ForestParams {
            n_trees: 100,
            mtry: N_FEATURES / 3,
            min_leaf_size: 5,
            max_depth: None,
        }
    }
}

impl ForestParams {
    pub fn validate(&self) -> Result<()> {
        if self.n_trees == 0 {
            return Err(Error::InvalidHyperparameters("n_trees must be ≥ 1".into()));
        }
        if self.mtry == 0 || self.mtry > N_FEATURES {
            return Err(Error::InvalidHyperparameters(format!(
                "mtry must lie in 1..={N_FEATURES}, got {}",
                self.mtry
            )));
        }
        if self.min_leaf_size == 0 {
            return Err(Error::InvalidHyperparameters("min_leaf_size must be ≥ 1".into()));
        }
        if self.max_depth == Some(0) {
            return Err(Error::InvalidHyperparameters("max_depth must be ≥ 1".into()));
        }
        Ok(())
    }

    fn tree_params(&self) -> TreeParams {
        TreeParams {
            mtry: self.mtry,
            min_leaf_size: self.min_leaf_size,
            max_depth: self.max_depth,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ForestModel {
    pub trees: Vec<TreeNode>,
    /// Sorted training positions absent from each tree's bootstrap.
    pub oob_indices: Vec<Vec<usize>>,
    pub tree_seeds: Vec<u64>,
    /// Size of the training set the indices refer to.
    pub n_train: usize,
}

impl ForestModel {
    pub fn predict(&self, x: &Features) -> f64 {
        self.trees.iter().map(|t| t.predict(x)).sum::<f64>() / self.trees.len() as f64
    }

    pub fn n_trees(&self) -> usize {
        self.trees.len()
    }
}

struct GrownTree {
    tree: TreeNode,
    oob: Vec<usize>,
}

fn grow_one(x: &[Features], y: &[f64], params: TreeParams, seed: u64) -> GrownTree {
    let n = x.len();
    let mut rng = rng_from(seed);
    let mut in_bag = vec![false; n];
    let bootstrap: Vec<usize> = (0..n)
        .map(|_| {
            let i = rng.random_range(0..n);
            in_bag[i] = true;
            i
        })
        .collect();
    let oob = (0..n).filter(|&i| !in_bag[i]).collect();
    let tree = TreeBuilder::new(x, y, params, &mut rng).build(bootstrap);
    GrownTree { tree, oob }
}

/// Grow `params.n_trees` trees on bootstrap resamples of `train`.
///
/// Tree `t` draws everything from `derive_seed(seed, t)`, so the result does
/// not depend on how the trees are scheduled across threads.
pub fn fit_forest(train: &Dataset, params: &ForestParams, seed: u64) -> Result<ForestModel> {
    params.validate()?;
    if train.len() < 2 {
        return Err(Error::TooFewRecords {
            needed: 2,
            got: train.len(),
        });
    }
    let x = train.feature_rows();
    let y = train.labels()?;
    let tree_seeds: Vec<u64> = (0..params.n_trees as u64)
        .map(|t| derive_seed(seed, t))
        .collect();
    let tp = params.tree_params();
    let grown: Vec<GrownTree> = tree_seeds
        .par_iter()
        .map(|&s| grow_one(&x, &y, tp, s))
        .collect();

    let (trees, oob_indices) = grown.into_iter().map(|g| (g.tree, g.oob)).unzip();
    Ok(ForestModel {
        trees,
        oob_indices,
        tree_seeds,
        n_train: train.len(),
    })
}

fn check_train(model: &ForestModel, train: &Dataset) -> Result<()> {
    if train.len() != model.n_train {
        return Err(Error::LengthMismatch {
            left: train.len(),
            right: model.n_train,
        });
    }
    Ok(())
}

/// Mean squared error of each tree on its own out-of-bag records.
pub fn oob_mse(model: &ForestModel, train: &Dataset) -> Result<Vec<f64>> {
    check_train(model, train)?;
    let y = train.labels()?;
    let records = train.records();
    model
        .trees
        .iter()
        .zip(&model.oob_indices)
        .enumerate()
        .map(|(t, (tree, oob))| {
            if oob.is_empty() {
                return Err(Error::EmptyOob { tree: t });
            }
            let sse: f64 = oob
                .iter()
                .map(|&i| {
                    let e = tree.predict(&records[i].features) - y[i];
                    e * e
                })
                .sum();
            Ok(sse / oob.len() as f64)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::ProcessRecord;
    use crate::models::tree::fit_tree;

    fn noisy(n: usize, seed: u64) -> Dataset {
        let mut rng = rng_from(seed);
        let records = (0..n)
            .map(|_| {
                let x: Features = std::array::from_fn(|_| rng.random::<f64>() * 2.0 - 1.0);
                let y = 2.0 * x[0] - x[1] * x[1] + 0.1 * rng.random::<f64>();
                ProcessRecord::new(x, Some(y))
            })
            .collect();
        Dataset::new(records).unwrap()
    }

    #[test]
    fn forest_of_constant_targets() {
        let d = Dataset::new(
            noisy(80, 1)
                .into_records()
                .into_iter()
                .map(|mut r| {
                    r.nt = Some(-1.5);
                    r
                })
                .collect(),
        )
        .unwrap();
        let f = fit_forest(&d, &ForestParams { n_trees: 10, ..Default::default() }, 3).unwrap();
        for r in noisy(20, 9).records() {
            assert_eq!(f.predict(&r.features), -1.5);
        }
    }

    #[test]
    fn prediction_is_mean_of_trees() {
        let d = noisy(200, 2);
        let f = fit_forest(&d, &ForestParams { n_trees: 7, ..Default::default() }, 5).unwrap();
        assert_eq!(f.n_trees(), 7);
        for r in d.records().iter().take(20) {
            let manual: f64 = f.trees.iter().map(|t| t.predict(&r.features)).sum::<f64>() / 7.0;
            assert_eq!(f.predict(&r.features), manual);
        }
    }

    #[test]
    fn full_bootstrap_forest_equals_its_tree() {
        let d = noisy(3, 4);
        let params = ForestParams { n_trees: 1, mtry: 8, min_leaf_size: 1, max_depth: None };
        // Search for a seed whose single bootstrap is a permutation of the data.
        let seed = (0..1000u64)
            .find(|&s| fit_forest(&d, &params, s).unwrap().oob_indices[0].is_empty())
            .expect("some seed draws every record once");
        let f = fit_forest(&d, &params, seed).unwrap();
        let x = d.feature_rows();
        let y = d.labels().unwrap();
        let direct = fit_tree(&x, &y, &params.tree_params(), &mut rng_from(0));
        for r in noisy(30, 12).records() {
            assert_eq!(f.predict(&r.features), direct.predict(&r.features));
        }
    }

    #[test]
    fn oob_fraction_matches_bootstrap_combinatorics() {
        let n = 1000;
        let expected = (1.0 - 1.0 / n as f64).powi(n as i32);
        assert!((expected - 0.3677).abs() < 1e-3);
        let params = ForestParams { n_trees: 100, max_depth: Some(1), ..Default::default() };
        let f = fit_forest(&noisy(n, 6), &params, 42).unwrap();
        let mean_frac = f.oob_indices.iter().map(|o| o.len() as f64 / n as f64).sum::<f64>() / 100.0;
        assert!((mean_frac - expected).abs() < 0.03, "{mean_frac}");
        for o in &f.oob_indices {
            assert!(o.windows(2).all(|w| w[0] < w[1]));
        }
    }

    #[test]
    fn same_seed_same_bits_different_seed_different_bags() {
        let d = noisy(150, 7);
        let p = ForestParams { n_trees: 5, ..Default::default() };
        let a = fit_forest(&d, &p, 10).unwrap();
        let b = fit_forest(&d, &p, 10).unwrap();
        assert_eq!(a, b);
        let c = fit_forest(&d, &p, 11).unwrap();
        assert_ne!(a.oob_indices, c.oob_indices);
    }

    #[test]
    fn invalid_params() {
        let d = noisy(10, 1);
        for p in [
            ForestParams { n_trees: 0, ..Default::default() },
            ForestParams { mtry: 0, ..Default::default() },
            ForestParams { mtry: 9, ..Default::default() },
            ForestParams { min_leaf_size: 0, ..Default::default() },
        ] {
            assert!(matches!(fit_forest(&d, &p, 1), Err(Error::InvalidHyperparameters(_))));
        }
    }

    #[test]
    fn oob_mse_hand_values() {
        // A single constant-leaf tree with OOB targets {0, 2} vs leaf value 1.
        let d = Dataset::from_rows(&[[0.0; 8], [0.0; 8], [0.0; 8]], &[5.0, 0.0, 2.0]).unwrap();
        let m = ForestModel {
            trees: vec![TreeNode::Leaf { value: 1.0 }],
            oob_indices: vec![vec![1, 2]],
            tree_seeds: vec![0],
            n_train: 3,
        };
        assert_eq!(oob_mse(&m, &d).unwrap(), vec![1.0]);

        let empty = ForestModel { oob_indices: vec![vec![]], ..m.clone() };
        assert!(matches!(oob_mse(&empty, &d), Err(Error::EmptyOob { tree: 0 })));

        let memorizer = ForestModel {
            trees: vec![TreeNode::Leaf { value: 0.0 }],
            oob_indices: vec![vec![1]],
            ..m
        };
        assert_eq!(oob_mse(&memorizer, &d).unwrap(), vec![0.0]);
    }

    #[test]
    fn oob_mse_is_nonnegative() {
        let d = noisy(300, 8);
        let f = fit_forest(&d, &ForestParams { n_trees: 20, ..Default::default() }, 2).unwrap();
        assert!(oob_mse(&f, &d).unwrap().iter().all(|&e| e >= 0.0));
    }
}
