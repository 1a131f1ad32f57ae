use rand::seq::SliceRandom;

use super::{ColumnStats, Dataset, FEATURE_NAMES, N_FEATURES};
use crate::error::{Error, Result};
use crate::seeds::rng_from;

/// Default |z| cut-off for `flag_outliers_zscore`.
pub const DEFAULT_ZSCORE_THRESHOLD: f64 = 4.0;

/// Seeded random partition into `floor(n * train_fraction)` train records
/// and the remainder as test. Both halves keep the shuffled order.
pub fn split(data: &Dataset, train_fraction: f64, seed: u64) -> Result<(Dataset, Dataset)> {
    if !(train_fraction > 0.0 && train_fraction < 1.0) {
        return Err(Error::InvalidHyperparameters(format!(
            "train fraction must lie in (0, 1), got {train_fraction}"
        )));
    }
    let n = data.len();
    let n_train = (n as f64 * train_fraction).floor() as usize;
    let n_test = n - n_train;
    if n_train == 0 || n_test == 0 {
        return Err(Error::EmptySplit { n_train, n_test });
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut rng_from(seed));
    let (train, test) = order.split_at(n_train);
    Ok((data.select(train), data.select(test)))
}

/// Drop every record flagged as an outlier, preserving order.
pub fn filter_outliers(data: &Dataset) -> Dataset {
    Dataset::from_parts(
        data.records().iter().filter(|r| !r.outlier).cloned().collect(),
        data.is_standardized(),
    )
}

/// Flag records with |z| above `threshold` in any feature, using statistics
/// over the whole dataset. Existing flags are kept.
pub fn flag_outliers_zscore(data: &Dataset, threshold: f64) -> Result<Dataset> {
    if !(threshold > 0.0) {
        return Err(Error::InvalidHyperparameters(format!(
            "z-score threshold must be positive, got {threshold}"
        )));
    }
    if data.len() < 2 {
        return Ok(data.clone());
    }
    let mut stats = Vec::with_capacity(N_FEATURES);
    for j in 0..N_FEATURES {
        let s = ColumnStats::of(&data.column(j));
        if s.is_degenerate() {
            return Err(Error::DegenerateColumn(FEATURE_NAMES[j].to_string()));
        }
        stats.push(s);
    }
    let records = data
        .records()
        .iter()
        .map(|r| {
            let mut out = r.clone();
            out.outlier |= r
                .features
                .iter()
                .zip(&stats)
                .any(|(&x, s)| s.forward(x).abs() > threshold);
            out
        })
        .collect();
    Ok(Dataset::from_parts(records, data.is_standardized()))
}
