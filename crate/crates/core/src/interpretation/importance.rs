use std::io::Write;

use rand::seq::SliceRandom;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dataset::{Dataset, FEATURE_NAMES, N_FEATURES};
use crate::error::{Error, Result};
use crate::models::{oob_mse, ForestModel, TreeNode};
use crate::seeds::{derive_seed, rng_from};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureImportance {
    pub name: String,
    /// Mean OOB MSE increase as a percentage of the mean baseline OOB MSE.
    pub pct_inc_mse: f64,
    /// Mean over trees of (permuted MSE − baseline MSE).
    pub raw_mean_diff: f64,
    /// Sample standard deviation of those differences across trees.
    pub std_of_diffs: f64,
    /// `raw_mean_diff / std_of_diffs`, or the raw mean when the spread is zero.
    pub normalized: f64,
    pub degenerate: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ImportanceReport {
    /// Sorted by descending `pct_inc_mse`, then by name.
    pub features: Vec<FeatureImportance>,
    pub mean_oob_mse: f64,
    pub n_trees: usize,
    pub repeats: usize,
}

impl ImportanceReport {
    pub fn ranking(&self) -> Vec<&str> {
        self.features.iter().map(|f| f.name.as_str()).collect()
    }

    pub fn get(&self, name: &str) -> Option<&FeatureImportance> {
        self.features.iter().find(|f| f.name == name)
    }

    /// Two-column `feature,pct_inc_mse` CSV in ranking order.
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(["feature", "pct_inc_mse"])?;
        for f in &self.features {
            w.write_record([f.name.clone(), f.pct_inc_mse.to_string()])?;
        }
        w.flush().map_err(|e| Error::io("<importance writer>", e))
    }
}

fn permuted_mse(
    tree: &TreeNode,
    train: &Dataset,
    y: &[f64],
    oob: &[usize],
    feature: usize,
    seed: u64,
) -> f64 {
    let records = train.records();
    let mut column: Vec<f64> = oob.iter().map(|&i| records[i].features[feature]).collect();
    column.shuffle(&mut rng_from(seed));
    let sse: f64 = oob
        .iter()
        .zip(&column)
        .map(|(&i, &v)| {
            let mut x = records[i].features;
            x[feature] = v;
            let e = tree.predict(&x) - y[i];
            e * e
        })
        .sum();
    sse / oob.len() as f64
}

/// Out-of-bag permutation importance.
///
/// For every tree `t` and feature `j`, the feature column is shuffled among
/// the tree's own OOB rows and the increase `d[t][j]` of that tree's OOB MSE
/// is recorded. Features a tree never splits on get `d = 0` without
/// shuffling. With `repeats > 1` the permuted MSE is averaged over that many
/// independent shuffles.
pub fn permutation_importance(
    model: &ForestModel,
    train: &Dataset,
    seed: u64,
    repeats: usize,
) -> Result<ImportanceReport> {
    if repeats == 0 {
        return Err(Error::InvalidHyperparameters("repeats must be ≥ 1".into()));
    }
    let baseline = oob_mse(model, train)?;
    let y = train.labels()?;
    let n_trees = model.trees.len();

    let diffs: Vec<[f64; N_FEATURES]> = (0..n_trees)
        .into_par_iter()
        .map(|t| {
            let tree = &model.trees[t];
            let oob = &model.oob_indices[t];
            let tree_seed = derive_seed(seed, t as u64);
            std::array::from_fn(|j| {
                if !tree.uses_feature(j) {
                    return 0.0;
                }
                let feature_seed = derive_seed(tree_seed, j as u64);
                let permuted = (0..repeats)
                    .map(|r| permuted_mse(tree, train, &y, oob, j, derive_seed(feature_seed, r as u64)))
                    .sum::<f64>()
                    / repeats as f64;
                permuted - baseline[t]
            })
        })
        .collect();

    let mean_oob_mse = baseline.iter().sum::<f64>() / n_trees as f64;
    let mut features: Vec<FeatureImportance> = (0..N_FEATURES)
        .map(|j| {
            let d: Vec<f64> = diffs.iter().map(|row| row[j]).collect();
            let mean = d.iter().sum::<f64>() / n_trees as f64;
            let std = if n_trees > 1 {
                (d.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n_trees - 1) as f64).sqrt()
            } else {
                0.0
            };
            let degenerate = std == 0.0;
            FeatureImportance {
                name: FEATURE_NAMES[j].to_string(),
                pct_inc_mse: if mean_oob_mse > 0.0 { 100.0 * mean / mean_oob_mse } else { 0.0 },
                raw_mean_diff: mean,
                std_of_diffs: std,
                normalized: if degenerate { mean } else { mean / std },
                degenerate,
            }
        })
        .collect();
    features.sort_by(|a, b| {
        b.pct_inc_mse
            .total_cmp(&a.pct_inc_mse)
            .then_with(|| a.name.cmp(&b.name))
    });
    Ok(ImportanceReport {
        features,
        mean_oob_mse,
        n_trees,
        repeats,
    })
}
