use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::models::{ForestModel, RegressionModel, TreeNode};

pub const DEFAULT_GRID_POINTS: usize = 200;
pub const DEFAULT_SMOOTHING_WINDOW: usize = 21;

/// Where to evaluate the curve.
#[derive(Debug, Clone, PartialEq)]
pub enum GridSpec {
    /// Strictly ascending values.
    Explicit(Vec<f64>),
    /// The sorted distinct observed values, thinned to at most this many
    /// evenly spaced order statistics.
    Quantiles(usize),
}

impl Default for GridSpec {
    fn default() -> Self {
        GridSpec::Quantiles(DEFAULT_GRID_POINTS)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PartialDependenceCurve {
    pub feature: String,
    pub grid: Vec<f64>,
    pub values: Vec<f64>,
    pub smoothed: Vec<f64>,
    pub n_background: usize,
    pub window: usize,
}

impl PartialDependenceCurve {
    /// Recompute `smoothed` with another window.
    pub fn resmooth(&mut self, window: usize) -> Result<()> {
        self.smoothed = smooth_curve(&self.values, window)?;
        self.window = window;
        Ok(())
    }

    /// Three-column `grid,value,smoothed` CSV.
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(["grid", "value", "smoothed"])?;
        for ((g, v), s) in self.grid.iter().zip(&self.values).zip(&self.smoothed) {
            w.write_record([g.to_string(), v.to_string(), s.to_string()])?;
        }
        w.flush().map_err(|e| Error::io("<pdp writer>", e))
    }
}

/// Centered moving average. Near the ends the window is truncated to the
/// values that exist, so `[0, 3, 0]` with window 3 gives `[1.5, 1, 1.5]`.
pub fn smooth_curve(values: &[f64], window: usize) -> Result<Vec<f64>> {
    if window == 0 || window % 2 == 0 {
        return Err(Error::InvalidHyperparameters(format!(
            "smoothing window must be odd and positive, got {window}"
        )));
    }
    if window > values.len() {
        return Err(Error::WindowTooLarge {
            window,
            len: values.len(),
        });
    }
    let half = window / 2;
    let n = values.len();
    Ok((0..n)
        .map(|i| {
            let lo = i.saturating_sub(half);
            let hi = (i + half).min(n - 1);
            values[lo..=hi].iter().sum::<f64>() / (hi - lo + 1) as f64
        })
        .collect())
}

fn build_grid(data: &Dataset, feature: usize, spec: &GridSpec) -> Result<Vec<f64>> {
    match spec {
        GridSpec::Explicit(g) => {
            if g.is_empty() {
                return Err(Error::EmptyInput);
            }
            if g.iter().any(|v| !v.is_finite()) || g.windows(2).any(|w| w[0] >= w[1]) {
                return Err(Error::InvalidHyperparameters(
                    "grid must be finite and strictly ascending".into(),
                ));
            }
            Ok(g.clone())
        }
        GridSpec::Quantiles(count) => {
            if *count == 0 {
                return Err(Error::InvalidHyperparameters("grid needs at least one point".into()));
            }
            let mut values = data.column(feature);
            values.sort_unstable_by(f64::total_cmp);
            values.dedup();
            let m = values.len();
            if m <= *count {
                return Ok(values);
            }
            if *count == 1 {
                return Ok(vec![values[m / 2]]);
            }
            let step = (m - 1) as f64 / (*count - 1) as f64;
            Ok((0..*count)
                .map(|i| values[((i as f64 * step).round() as usize).min(m - 1)])
                .collect())
        }
    }
}

/// Average prediction over `data` with `feature` pinned to each grid value.
///
/// All records contribute their observed values for the remaining features.
/// Forests use an exact tree walk that visits only the branches a grid value
/// can reach; other models are evaluated record by record.
pub fn partial_dependence(
    model: &RegressionModel,
    data: &Dataset,
    feature: &str,
    grid: &GridSpec,
) -> Result<PartialDependenceCurve> {
    match model {
        RegressionModel::RandomForest(forest) => compute(data, feature, grid, |j, g| forest_curve(forest, data, j, g)),
        _ => compute(data, feature, grid, |j, g| brute_force_curve(model, data, j, g)),
    }
}

/// Record-by-record evaluation for any model.
pub fn partial_dependence_brute_force(
    model: &RegressionModel,
    data: &Dataset,
    feature: &str,
    grid: &GridSpec,
) -> Result<PartialDependenceCurve> {
    compute(data, feature, grid, |j, g| brute_force_curve(model, data, j, g))
}

fn compute(
    data: &Dataset,
    feature: &str,
    grid: &GridSpec,
    curve: impl FnOnce(usize, &[f64]) -> Vec<f64>,
) -> Result<PartialDependenceCurve> {
    let j = data.schema().index_of(feature)?;
    if data.is_empty() {
        return Err(Error::EmptyInput);
    }
    let grid = build_grid(data, j, grid)?;
    let values = curve(j, &grid);
    let window = DEFAULT_SMOOTHING_WINDOW.min(if grid.len() % 2 == 1 { grid.len() } else { grid.len() - 1 });
    let smoothed = smooth_curve(&values, window)?;
    Ok(PartialDependenceCurve {
        feature: feature.to_string(),
        grid,
        values,
        smoothed,
        n_background: data.len(),
        window,
    })
}

fn brute_force_curve(model: &RegressionModel, data: &Dataset, j: usize, grid: &[f64]) -> Vec<f64> {
    let n = data.len() as f64;
    grid.iter()
        .map(|&v| {
            data.records()
                .iter()
                .map(|r| {
                    let mut x = r.features;
                    x[j] = v;
                    model.predict(&x)
                })
                .sum::<f64>()
                / n
        })
        .collect()
}

/// Walk `node` for a record whose feature `j` sweeps `grid[lo..hi]`, adding
/// each reached leaf's value to the grid points that land in it.
fn accumulate(node: &TreeNode, x: &[f64], j: usize, grid: &[f64], lo: usize, hi: usize, acc: &mut [f64]) {
    match node {
        TreeNode::Leaf { value } => acc[lo..hi].iter_mut().for_each(|a| *a += value),
        TreeNode::Split {
            feature,
            threshold,
            left,
            right,
        } => {
            if *feature == j {
                let mid = lo + grid[lo..hi].partition_point(|g| g <= threshold);
                if mid > lo {
                    accumulate(left, x, j, grid, lo, mid, acc);
                }
                if hi > mid {
                    accumulate(right, x, j, grid, mid, hi, acc);
                }
            } else if x[*feature] <= *threshold {
                accumulate(left, x, j, grid, lo, hi, acc);
            } else {
                accumulate(right, x, j, grid, lo, hi, acc);
            }
        }
    }
}

fn forest_curve(forest: &ForestModel, data: &Dataset, j: usize, grid: &[f64]) -> Vec<f64> {
    use rayon::prelude::*;
    let g = grid.len();
    let per_record: Vec<Vec<f64>> = data
        .records()
        .par_iter()
        .map(|r| {
            let mut acc = vec![0.0; g];
            for t in &forest.trees {
                accumulate(t, &r.features, j, grid, 0, g, &mut acc);
            }
            let n_trees = forest.trees.len() as f64;
            acc.iter_mut().for_each(|a| *a /= n_trees);
            acc
        })
        .collect();
    let n = data.len() as f64;
    (0..g)
        .map(|k| per_record.iter().map(|row| row[k]).sum::<f64>() / n)
        .collect()
}
