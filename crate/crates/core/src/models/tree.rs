//! CART regression trees grown by exhaustive variance-reduction search.

use rand::seq::index::sample;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::dataset::Features;

/// A fitted regression tree. Records go left when `x[feature] <= threshold`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum TreeNode {
    Split {
        feature: usize,
        threshold: f64,
        left: Box<TreeNode>,
        right: Box<TreeNode>,
    },
    Leaf {
        value: f64,
    },
}

impl TreeNode {
    pub fn predict(&self, x: &[f64]) -> f64 {
        let mut node = self;
        loop {
            match node {
                TreeNode::Leaf { value } => return *value,
                TreeNode::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => node = if x[*feature] <= *threshold { left } else { right },
            }
        }
    }

    pub fn is_leaf(&self) -> bool {
        matches!(self, TreeNode::Leaf { .. })
    }

    pub fn n_leaves(&self) -> usize {
        match self {
            TreeNode::Leaf { .. } => 1,
            TreeNode::Split { left, right, .. } => left.n_leaves() + right.n_leaves(),
        }
    }

    pub fn depth(&self) -> usize {
        match self {
            TreeNode::Leaf { .. } => 0,
            TreeNode::Split { left, right, .. } => 1 + left.depth().max(right.depth()),
        }
    }

    /// True if some internal node tests `feature`.
    pub fn uses_feature(&self, feature: usize) -> bool {
        match self {
            TreeNode::Leaf { .. } => false,
            TreeNode::Split {
                feature: f,
                left,
                right,
                ..
            } => *f == feature || left.uses_feature(feature) || right.uses_feature(feature),
        }
    }
}

/// Growth controls shared by single trees and forests.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TreeParams {
    /// Features drawn (without replacement) as split candidates at each node.
    pub mtry: usize,
    /// Minimum records on each side of a split.
    pub min_leaf_size: usize,
    /// `None` grows until the size or purity rule stops it.
    pub max_depth: Option<usize>,
}

/// Best (feature, threshold) for a node, with the summed child SSE.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SplitChoice {
    pub feature: usize,
    pub threshold: f64,
    pub child_sse: f64,
}

/// Relative slack under which two candidate costs count as tied; ties keep
/// the earlier (lower feature, lower threshold) candidate.
pub const SPLIT_TIE_TOLERANCE: f64 = 1e-10;

/// Midpoint of two consecutive distinct sorted values, kept strictly below `hi`
/// so that `lo` goes left and `hi` goes right.
pub fn midpoint(lo: f64, hi: f64) -> f64 {
    let m = lo + (hi - lo) / 2.0;
    if m < hi {
        m
    } else {
        lo
    }
}

/// Exhaustive split search over `features` (visited in ascending order) for
/// the records `idx`. Returns `None` when no split leaves `min_leaf` records
/// per side or none reduces the node SSE.
pub fn find_best_split(
    x: &[Features],
    y: &[f64],
    idx: &[usize],
    features: &[usize],
    min_leaf: usize,
) -> Option<SplitChoice> {
    let n = idx.len();
    let min_leaf = min_leaf.max(1);
    if n < 2 * min_leaf {
        return None;
    }
    let mean = idx.iter().map(|&i| y[i]).sum::<f64>() / n as f64;
    let node_sse: f64 = idx.iter().map(|&i| (y[i] - mean) * (y[i] - mean)).sum();
    let tol = SPLIT_TIE_TOLERANCE * node_sse;

    let mut best: Option<SplitChoice> = None;
    let mut best_cost = node_sse - tol;
    let mut pairs: Vec<(f64, f64)> = Vec::with_capacity(n);
    for &f in features {
        pairs.clear();
        pairs.extend(idx.iter().map(|&i| (x[i][f], y[i] - mean)));
        pairs.sort_unstable_by(|a, b| a.0.total_cmp(&b.0));

        let total: f64 = pairs.iter().map(|p| p.1).sum();
        let mut left_sum = 0.0;
        for k in 1..n {
            left_sum += pairs[k - 1].1;
            if k < min_leaf || n - k < min_leaf || pairs[k - 1].0 == pairs[k].0 {
                continue;
            }
            let right_sum = total - left_sum;
            let cost = node_sse
                - left_sum * left_sum / k as f64
                - right_sum * right_sum / (n - k) as f64;
            if cost < best_cost {
                best_cost = cost - tol;
                best = Some(SplitChoice {
                    feature: f,
                    threshold: midpoint(pairs[k - 1].0, pairs[k].0),
                    child_sse: cost,
                });
            }
        }
    }
    best
}

pub(crate) struct TreeBuilder<'a, R: Rng> {
    x: &'a [Features],
    y: &'a [f64],
    params: TreeParams,
    rng: &'a mut R,
}

impl<'a, R: Rng> TreeBuilder<'a, R> {
    pub(crate) fn new(x: &'a [Features], y: &'a [f64], params: TreeParams, rng: &'a mut R) -> Self {
        TreeBuilder { x, y, params, rng }
    }

    pub(crate) fn build(&mut self, idx: Vec<usize>) -> TreeNode {
        self.grow(idx, 0)
    }

    fn grow(&mut self, idx: Vec<usize>, depth: usize) -> TreeNode {
        let n = idx.len();
        let mean = idx.iter().map(|&i| self.y[i]).sum::<f64>() / n as f64;
        let first = self.y[idx[0]];
        let pure = idx.iter().all(|&i| self.y[i] == first);
        let too_small = n < 2 * self.params.min_leaf_size.max(1);
        let too_deep = self.params.max_depth.is_some_and(|d| depth >= d);
        if pure || too_small || too_deep {
            return TreeNode::Leaf { value: mean };
        }

        let p = self.x[0].len();
        let mut features = sample(self.rng, p, self.params.mtry.min(p)).into_vec();
        features.sort_unstable();

        let Some(choice) = find_best_split(self.x, self.y, &idx, &features, self.params.min_leaf_size)
        else {
            return TreeNode::Leaf { value: mean };
        };
        let (left, right): (Vec<usize>, Vec<usize>) = idx
            .into_iter()
            .partition(|&i| self.x[i][choice.feature] <= choice.threshold);
        debug_assert!(!left.is_empty() && !right.is_empty());
        let left = self.grow(left, depth + 1);
        let right = self.grow(right, depth + 1);
        TreeNode::Split {
            feature: choice.feature,
            threshold: choice.threshold,
            left: Box::new(left),
            right: Box::new(right),
        }
    }
}

/// Fit one tree on an (already resampled) sample.
pub fn fit_tree<R: Rng>(x: &[Features], y: &[f64], params: &TreeParams, rng: &mut R) -> TreeNode {
    assert!(!x.is_empty() && x.len() == y.len(), "fit_tree needs a non-empty sample");
    TreeBuilder::new(x, y, *params, rng).build((0..x.len()).collect())
}
