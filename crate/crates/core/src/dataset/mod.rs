//! Tabular process data: schema, records, CSV ingestion, standardization,
//! splitting and outlier handling.

mod csv_io;
mod ops;
mod standardize;

pub use csv_io::{parse_csv, read_csv, write_csv};
pub use ops::{filter_outliers, flag_outliers_zscore, split, DEFAULT_ZSCORE_THRESHOLD};
pub use standardize::{
    apply_standardizer, fit_standardizer, invert_standardizer, ColumnStats, Standardizer,
};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Number of process parameters per record.
pub const N_FEATURES: usize = 8;

/// Canonical feature identifiers, in column order.
pub const FEATURE_NAMES: [&str; N_FEATURES] = [
    "raw_material",
    "sulfur",
    "dew_point",
    "air_sulfur_oven",
    "air_converter",
    "air_so3_filter",
    "molar",
    "molar_stp",
];

/// Name of the label column.
pub const NT_COLUMN: &str = "nt";

/// Feature vector of one record.
pub type Features = [f64; N_FEATURES];

/// The fixed ordered set of process parameters.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(try_from = "Vec<String>", into = "Vec<String>")]
pub struct FeatureSchema;

impl FeatureSchema {
    pub fn canonical() -> Self {
        FeatureSchema
    }

    /// Validate an explicit list of names against the canonical order.
    pub fn from_names<S: AsRef<str>>(names: &[S]) -> Result<Self> {
        if names.len() != N_FEATURES {
            return Err(Error::SchemaMismatch(format!(
                "expected {N_FEATURES} feature names, got {}",
                names.len()
            )));
        }
        for (i, (got, want)) in names.iter().zip(FEATURE_NAMES).enumerate() {
            if got.as_ref() != want {
                return Err(Error::SchemaMismatch(format!(
                    "column {i} is `{}`, expected `{want}`",
                    got.as_ref()
                )));
            }
        }
        Ok(FeatureSchema)
    }

    pub fn names(&self) -> &'static [&'static str; N_FEATURES] {
        &FEATURE_NAMES
    }

    pub fn len(&self) -> usize {
        N_FEATURES
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn index_of(&self, name: &str) -> Result<usize> {
        FEATURE_NAMES
            .iter()
            .position(|n| *n == name)
            .ok_or_else(|| Error::UnknownFeature(name.to_string()))
    }
}

impl TryFrom<Vec<String>> for FeatureSchema {
    type Error = Error;

    fn try_from(names: Vec<String>) -> Result<Self> {
        FeatureSchema::from_names(&names)
    }
}

impl From<FeatureSchema> for Vec<String> {
    fn from(_: FeatureSchema) -> Self {
        FEATURE_NAMES.iter().map(|s| s.to_string()).collect()
    }
}

/// One observation of the process.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProcessRecord {
    pub features: Features,
    pub nt: Option<f64>,
    pub outlier: bool,
    pub timestamp: Option<i64>,
}

impl ProcessRecord {
    pub fn new(features: Features, nt: Option<f64>) -> Self {
        ProcessRecord {
            features,
            nt,
            outlier: false,
            timestamp: None,
        }
    }

    pub fn with_outlier(mut self, outlier: bool) -> Self {
        self.outlier = outlier;
        self
    }

    fn check_finite(&self) -> std::result::Result<(), String> {
        if let Some(j) = self.features.iter().position(|v| !v.is_finite()) {
            return Err(format!("non-finite value in `{}`", FEATURE_NAMES[j]));
        }
        match self.nt {
            Some(v) if !v.is_finite() => Err("non-finite value in `nt`".to_string()),
            _ => Ok(()),
        }
    }
}

/// Ordered collection of records sharing the canonical schema.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dataset {
    schema: FeatureSchema,
    records: Vec<ProcessRecord>,
    standardized: bool,
}

impl Dataset {
    /// Build a raw-unit dataset, rejecting non-finite values.
    pub fn new(records: Vec<ProcessRecord>) -> Result<Self> {
        for (i, r) in records.iter().enumerate() {
            r.check_finite()
                .map_err(|reason| Error::MalformedRow { row: i + 1, reason })?;
        }
        Ok(Dataset {
            schema: FeatureSchema,
            records,
            standardized: false,
        })
    }

    /// Convenience constructor for labeled rows.
    pub fn from_rows(features: &[Features], nt: &[f64]) -> Result<Self> {
        if features.len() != nt.len() {
            return Err(Error::LengthMismatch {
                left: features.len(),
                right: nt.len(),
            });
        }
        let records = features
            .iter()
            .zip(nt)
            .map(|(x, &y)| ProcessRecord::new(*x, Some(y)))
            .collect();
        Dataset::new(records)
    }

    pub(crate) fn from_parts(records: Vec<ProcessRecord>, standardized: bool) -> Self {
        Dataset {
            schema: FeatureSchema,
            records,
            standardized,
        }
    }

    pub fn schema(&self) -> FeatureSchema {
        self.schema
    }

    pub fn records(&self) -> &[ProcessRecord] {
        &self.records
    }

    pub fn into_records(self) -> Vec<ProcessRecord> {
        self.records
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn is_standardized(&self) -> bool {
        self.standardized
    }

    /// Mark the dataset as already being on the standardized scale.
    pub fn assume_standardized(mut self) -> Self {
        self.standardized = true;
        self
    }

    pub fn feature_rows(&self) -> Vec<Features> {
        self.records.iter().map(|r| r.features).collect()
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        self.records.iter().map(|r| r.features[j]).collect()
    }

    /// NT labels; fails on the first unlabeled record.
    pub fn labels(&self) -> Result<Vec<f64>> {
        self.records
            .iter()
            .enumerate()
            .map(|(i, r)| r.nt.ok_or(Error::MissingLabel(i)))
            .collect()
    }

    pub fn n_outliers(&self) -> usize {
        self.records.iter().filter(|r| r.outlier).count()
    }

    /// Records at the given positions, in the given order.
    pub fn select(&self, indices: &[usize]) -> Dataset {
        Dataset::from_parts(
            indices.iter().map(|&i| self.records[i].clone()).collect(),
            self.standardized,
        )
    }
}
