use serde::{Deserialize, Serialize};

use super::{Dataset, Features, FEATURE_NAMES, N_FEATURES, NT_COLUMN};
use crate::error::{Error, Result};

/// Location and scale of one column.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ColumnStats {
    pub mean: f64,
    pub std: f64,
}

impl ColumnStats {
    /// Sample statistics (n − 1 denominator). Two-pass for accuracy.
    pub fn of(values: &[f64]) -> ColumnStats {
        let n = values.len() as f64;
        let mean = values.iter().sum::<f64>() / n;
        let ss: f64 = values.iter().map(|v| (v - mean) * (v - mean)).sum();
        ColumnStats {
            mean,
            std: (ss / (n - 1.0)).sqrt(),
        }
    }

    pub fn is_degenerate(&self) -> bool {
        !(self.std > 1e-12 * self.mean.abs()) || self.std == 0.0
    }

    #[inline]
    pub fn forward(&self, x: f64) -> f64 {
        (x - self.mean) / self.std
    }

    #[inline]
    pub fn inverse(&self, z: f64) -> f64 {
        z * self.std + self.mean
    }
}

/// Per-column z-score transform for the 8 features and NT.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Standardizer {
    pub features: [ColumnStats; N_FEATURES],
    pub nt: ColumnStats,
}

impl Standardizer {
    pub fn transform_features(&self, x: &Features) -> Features {
        std::array::from_fn(|j| self.features[j].forward(x[j]))
    }

    pub fn inverse_features(&self, z: &Features) -> Features {
        std::array::from_fn(|j| self.features[j].inverse(z[j]))
    }

    pub fn transform_nt(&self, y: f64) -> f64 {
        self.nt.forward(y)
    }

    pub fn inverse_nt(&self, z: f64) -> f64 {
        self.nt.inverse(z)
    }
}

/// Fit means and sample standard deviations on a labeled dataset.
pub fn fit_standardizer(data: &Dataset) -> Result<Standardizer> {
    if data.len() < 2 {
        return Err(Error::EmptyInput);
    }
    let labels = data.labels()?;
    let check = |stats: ColumnStats, name: &str| {
        if stats.is_degenerate() {
            Err(Error::DegenerateColumn(name.to_string()))
        } else {
            Ok(stats)
        }
    };
    let mut features = [ColumnStats { mean: 0.0, std: 1.0 }; N_FEATURES];
    for (j, slot) in features.iter_mut().enumerate() {
        *slot = check(ColumnStats::of(&data.column(j)), FEATURE_NAMES[j])?;
    }
    let nt = check(ColumnStats::of(&labels), NT_COLUMN)?;
    Ok(Standardizer { features, nt })
}

/// Map every value to `(x − mean) / std`. Unlabeled records stay unlabeled.
pub fn apply_standardizer(data: &Dataset, s: &Standardizer) -> Result<Dataset> {
    if data.is_standardized() {
        return Err(Error::SchemaMismatch(
            "dataset is already standardized".to_string(),
        ));
    }
    let records = data
        .records()
        .iter()
        .map(|r| {
            let mut out = r.clone();
            out.features = s.transform_features(&r.features);
            out.nt = r.nt.map(|y| s.transform_nt(y));
            out
        })
        .collect();
    Ok(Dataset::from_parts(records, true))
}

/// Undo `apply_standardizer`.
pub fn invert_standardizer(data: &Dataset, s: &Standardizer) -> Result<Dataset> {
    if !data.is_standardized() {
        return Err(Error::SchemaMismatch(
            "dataset is not standardized".to_string(),
        ));
    }
    let records = data
        .records()
        .iter()
        .map(|r| {
            let mut out = r.clone();
            out.features = s.inverse_features(&r.features);
            out.nt = r.nt.map(|z| s.inverse_nt(z));
            out
        })
        .collect();
    Ok(Dataset::from_parts(records, false))
}
