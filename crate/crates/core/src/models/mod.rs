//! The four predictors behind one `predict` contract.

mod forest;
mod linear;
mod network;
mod persist;
mod tree;

pub use forest::{fit_forest, oob_mse, ForestModel, ForestParams};
pub use linear::{fit_linear, LinearModel};
pub use network::{fit_network, NetworkModel, NetworkParams, N_HIDDEN, N_PARAMS};
pub use persist::{load_model, read_model, save_model, write_model, FORMAT_VERSION};
pub use tree::{find_best_split, fit_tree, midpoint, SplitChoice, TreeNode, TreeParams, SPLIT_TIE_TOLERANCE};

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::dataset::{apply_standardizer, fit_standardizer, Dataset, Features, Standardizer};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelKind {
    RandomForest,
    NeuralNet,
    Linear,
    MeanBaseline,
}

impl ModelKind {
    /// Report order: forest, network, linear, baseline.
    pub const ALL: [ModelKind; 4] = [
        ModelKind::RandomForest,
        ModelKind::NeuralNet,
        ModelKind::Linear,
        ModelKind::MeanBaseline,
    ];

    /// Short flag value used on the command line.
    pub fn code(&self) -> &'static str {
        match self {
            ModelKind::RandomForest => "rf",
            ModelKind::NeuralNet => "nn",
            ModelKind::Linear => "lm",
            ModelKind::MeanBaseline => "mean",
        }
    }

    /// Row label in result tables.
    pub fn label(&self) -> &'static str {
        match self {
            ModelKind::RandomForest => "Random Forest",
            ModelKind::NeuralNet => "Neural Network",
            ModelKind::Linear => "Linear regression",
            ModelKind::MeanBaseline => "Mean value",
        }
    }

    pub fn as_str(&self) -> &'static str {
        match self {
            ModelKind::RandomForest => "random_forest",
            ModelKind::NeuralNet => "neural_net",
            ModelKind::Linear => "linear",
            ModelKind::MeanBaseline => "mean_baseline",
        }
    }
}

impl fmt::Display for ModelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ModelKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        ModelKind::ALL
            .into_iter()
            .find(|k| k.code() == s || k.as_str() == s)
            .ok_or_else(|| Error::InvalidHyperparameters(format!("unknown model kind `{s}`")))
    }
}

/// Kind-specific settings.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Hyperparameters {
    RandomForest(ForestParams),
    NeuralNet(NetworkParams),
    Linear,
    MeanBaseline,
}

impl Hyperparameters {
    pub fn default_for(kind: ModelKind) -> Self {
        match kind {
            ModelKind::RandomForest => Hyperparameters::RandomForest(ForestParams::default()),
            ModelKind::NeuralNet => Hyperparameters::NeuralNet(NetworkParams::default()),
            ModelKind::Linear => Hyperparameters::Linear,
            ModelKind::MeanBaseline => Hyperparameters::MeanBaseline,
        }
    }

    pub fn kind(&self) -> ModelKind {
        match self {
            Hyperparameters::RandomForest(_) => ModelKind::RandomForest,
            Hyperparameters::NeuralNet(_) => ModelKind::NeuralNet,
            Hyperparameters::Linear => ModelKind::Linear,
            Hyperparameters::MeanBaseline => ModelKind::MeanBaseline,
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            Hyperparameters::RandomForest(p) => p.validate(),
            Hyperparameters::NeuralNet(p) => p.validate(),
            Hyperparameters::Linear | Hyperparameters::MeanBaseline => Ok(()),
        }
    }
}

/// What to train and from which seed.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RegressorSpec {
    pub hyperparameters: Hyperparameters,
    pub seed: u64,
}

impl RegressorSpec {
    pub fn new(hyperparameters: Hyperparameters, seed: u64) -> Self {
        RegressorSpec {
            hyperparameters,
            seed,
        }
    }

    pub fn default_for(kind: ModelKind, seed: u64) -> Self {
        RegressorSpec::new(Hyperparameters::default_for(kind), seed)
    }

    pub fn kind(&self) -> ModelKind {
        self.hyperparameters.kind()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeanBaselineModel {
    pub mean_nt: f64,
}

/// A trained predictor. Inputs and outputs are on the standardized scale.
#[derive(Debug, Clone, PartialEq)]
pub enum RegressionModel {
    RandomForest(ForestModel),
    NeuralNet(NetworkModel),
    Linear(LinearModel),
    MeanBaseline(MeanBaselineModel),
}

impl RegressionModel {
    pub fn kind(&self) -> ModelKind {
        match self {
            RegressionModel::RandomForest(_) => ModelKind::RandomForest,
            RegressionModel::NeuralNet(_) => ModelKind::NeuralNet,
            RegressionModel::Linear(_) => ModelKind::Linear,
            RegressionModel::MeanBaseline(_) => ModelKind::MeanBaseline,
        }
    }

    pub fn predict(&self, x: &Features) -> f64 {
        match self {
            RegressionModel::RandomForest(m) => m.predict(x),
            RegressionModel::NeuralNet(m) => m.predict(x),
            RegressionModel::Linear(m) => m.predict(x),
            RegressionModel::MeanBaseline(m) => m.mean_nt,
        }
    }

    pub fn predict_all(&self, data: &Dataset) -> Vec<f64> {
        data.records().iter().map(|r| self.predict(&r.features)).collect()
    }

    pub fn as_forest(&self) -> Option<&ForestModel> {
        match self {
            RegressionModel::RandomForest(f) => Some(f),
            _ => None,
        }
    }
}

/// Train on standardized, fully labeled data.
pub fn train(spec: &RegressorSpec, train_data: &Dataset) -> Result<RegressionModel> {
    spec.hyperparameters.validate()?;
    if !train_data.is_standardized() {
        return Err(Error::SchemaMismatch(
            "training requires standardized data".to_string(),
        ));
    }
    if train_data.len() < 2 {
        return Err(Error::TooFewRecords {
            needed: 2,
            got: train_data.len(),
        });
    }
    let labels = train_data.labels()?;
    Ok(match spec.hyperparameters {
        Hyperparameters::RandomForest(p) => {
            RegressionModel::RandomForest(fit_forest(train_data, &p, spec.seed)?)
        }
        Hyperparameters::NeuralNet(p) => {
            RegressionModel::NeuralNet(fit_network(train_data, &p, spec.seed)?)
        }
        Hyperparameters::Linear => RegressionModel::Linear(fit_linear(train_data)?),
        Hyperparameters::MeanBaseline => RegressionModel::MeanBaseline(MeanBaselineModel {
            mean_nt: labels.iter().sum::<f64>() / labels.len() as f64,
        }),
    })
}

/// A trained model bundled with the standardizer fitted on its training
/// split, so it can be applied to raw-unit process readings.
#[derive(Debug, Clone, PartialEq)]
pub struct SoftSensor {
    pub spec: RegressorSpec,
    pub standardizer: Standardizer,
    pub model: RegressionModel,
}

impl SoftSensor {
    /// Fit the standardizer on `raw_train`, then train on the scaled data.
    pub fn fit(spec: &RegressorSpec, raw_train: &Dataset) -> Result<SoftSensor> {
        let standardizer = fit_standardizer(raw_train)?;
        let scaled = apply_standardizer(raw_train, &standardizer)?;
        let model = train(spec, &scaled)?;
        Ok(SoftSensor {
            spec: *spec,
            standardizer,
            model,
        })
    }

    pub fn kind(&self) -> ModelKind {
        self.model.kind()
    }

    /// Predict NT in raw units from raw-unit features.
    pub fn predict_raw(&self, x: &Features) -> f64 {
        let z = self.standardizer.transform_features(x);
        self.standardizer.inverse_nt(self.model.predict(&z))
    }

    /// Scale a raw dataset the way the training data was scaled.
    pub fn standardize(&self, raw: &Dataset) -> Result<Dataset> {
        apply_standardizer(raw, &self.standardizer)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn scaled(nt: &[f64]) -> Dataset {
        let x: Vec<Features> = (0..nt.len()).map(|i| [i as f64; 8]).collect();
        Dataset::from_rows(&x, nt).unwrap().assume_standardized()
    }

    #[test]
    fn mean_baseline() {
        let m = train(&RegressorSpec::default_for(ModelKind::MeanBaseline, 0), &scaled(&[0.5, 1.5])).unwrap();
        assert_eq!(m, RegressionModel::MeanBaseline(MeanBaselineModel { mean_nt: 1.0 }));
        assert_eq!(m.predict(&[9.0; 8]), 1.0);
    }

    #[test]
    fn single_leaf_forest_predicts_leaf() {
        let m = RegressionModel::RandomForest(ForestModel {
            trees: vec![TreeNode::Leaf { value: -0.25 }],
            oob_indices: vec![vec![]],
            tree_seeds: vec![0],
            n_train: 0,
        });
        assert_eq!(m.predict(&[1.0; 8]), -0.25);
    }

    #[test]
    fn training_requires_standardized_labeled_data() {
        let raw = Dataset::from_rows(&[[0.0; 8], [1.0; 8]], &[1.0, 2.0]).unwrap();
        let spec = RegressorSpec::default_for(ModelKind::MeanBaseline, 0);
        assert!(matches!(train(&spec, &raw), Err(Error::SchemaMismatch(_))));
        assert!(matches!(train(&spec, &scaled(&[1.0])), Err(Error::TooFewRecords { .. })));
        let bad = RegressorSpec::new(
            Hyperparameters::RandomForest(ForestParams { n_trees: 0, ..Default::default() }),
            0,
        );
        assert!(matches!(train(&bad, &scaled(&[1.0, 2.0])), Err(Error::InvalidHyperparameters(_))));
    }

    #[test]
    fn kind_codes_parse() {
        for k in ModelKind::ALL {
            assert_eq!(k.code().parse::<ModelKind>().unwrap(), k);
            assert_eq!(k.as_str().parse::<ModelKind>().unwrap(), k);
        }
        assert!("svm".parse::<ModelKind>().is_err());
    }
}
