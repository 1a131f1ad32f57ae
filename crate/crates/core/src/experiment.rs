//! The two-setting comparison: every model trained and scored on the same
//! seeded split, once with the flagged outliers kept and once with them
//! removed, followed by importance and partial dependence on the clean forest.

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::dataset::{filter_outliers, split, Dataset};
use crate::error::{Error, Result};
use crate::evaluation::{evaluate, render_table, Evaluation, EvaluationReport, OutlierSetting};
use crate::interpretation::{
    partial_dependence, permutation_importance, GridSpec, ImportanceReport, PartialDependenceCurve,
    DEFAULT_GRID_POINTS,
};
use crate::models::{ForestParams, Hyperparameters, ModelKind, NetworkParams, RegressorSpec, SoftSensor};
use crate::seeds::{derive_seed, STREAM_FOREST, STREAM_NETWORK, STREAM_PERMUTATION, STREAM_SPLIT};

pub const DEFAULT_TRAIN_FRACTION: f64 = 0.7;
pub const DEFAULT_SEED: u64 = 42;
pub const PDP_FEATURE: &str = "raw_material";

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ExperimentConfig {
    pub train_fraction: f64,
    pub seed: u64,
    pub forest: ForestParams,
    pub network: NetworkParams,
    pub importance_repeats: usize,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            train_fraction: DEFAULT_TRAIN_FRACTION,
            seed: DEFAULT_SEED,
            forest: ForestParams::default(),
            network: NetworkParams::default(),
            importance_repeats: 1,
        }
    }
}

impl ExperimentConfig {
    /// The spec each model kind is trained with, carrying its derived seed.
    pub fn spec_for(&self, kind: ModelKind) -> RegressorSpec {
        match kind {
            ModelKind::RandomForest => RegressorSpec::new(
                Hyperparameters::RandomForest(self.forest),
                derive_seed(self.seed, STREAM_FOREST),
            ),
            ModelKind::NeuralNet => RegressorSpec::new(
                Hyperparameters::NeuralNet(self.network),
                derive_seed(self.seed, STREAM_NETWORK),
            ),
            other => RegressorSpec::default_for(other, self.seed),
        }
    }
}

/// Raw-unit train and test sets for one setting. The split is drawn once
/// from the master seed; dropping outliers filters both halves of it.
pub fn prepare_split(
    data: &Dataset,
    train_fraction: f64,
    seed: u64,
    setting: OutlierSetting,
) -> Result<(Dataset, Dataset)> {
    let (train, test) = split(data, train_fraction, derive_seed(seed, STREAM_SPLIT))?;
    Ok(match setting {
        OutlierSetting::WithOutliers => (train, test),
        OutlierSetting::WithoutOutliers => (filter_outliers(&train), filter_outliers(&test)),
    })
}

/// Score a fitted sensor on a raw-unit test set, on the standardized scale.
pub fn evaluate_sensor(sensor: &SoftSensor, raw_test: &Dataset, setting: OutlierSetting) -> Result<Evaluation> {
    evaluate(&sensor.model, &sensor.standardize(raw_test)?, setting)
}

#[derive(Debug, Clone)]
pub struct SettingResult {
    pub setting: OutlierSetting,
    pub sensors: Vec<SoftSensor>,
    pub evaluations: Vec<Evaluation>,
}

impl SettingResult {
    pub fn reports(&self) -> Vec<EvaluationReport> {
        self.evaluations.iter().map(|e| e.report.clone()).collect()
    }

    pub fn report(&self, kind: ModelKind) -> Option<&EvaluationReport> {
        self.evaluations
            .iter()
            .map(|e| &e.report)
            .find(|r| r.model_kind == kind)
    }

    pub fn sensor(&self, kind: ModelKind) -> Option<&SoftSensor> {
        self.sensors.iter().find(|s| s.kind() == kind)
    }

    pub fn table(&self) -> String {
        render_table(&format!("Results on dataset {}", self.setting.label()), &self.reports())
    }
}

#[derive(Debug, Clone)]
pub struct ExperimentResult {
    pub config: ExperimentConfig,
    pub settings: Vec<SettingResult>,
    pub importance: ImportanceReport,
    pub pdp: PartialDependenceCurve,
}

impl ExperimentResult {
    pub fn setting(&self, setting: OutlierSetting) -> &SettingResult {
        self.settings
            .iter()
            .find(|s| s.setting == setting)
            .expect("both settings are always run")
    }
}

pub fn run_setting(data: &Dataset, config: &ExperimentConfig, setting: OutlierSetting) -> Result<SettingResult> {
    let (train, test) = prepare_split(data, config.train_fraction, config.seed, setting)?;
    let mut sensors = Vec::with_capacity(ModelKind::ALL.len());
    let mut evaluations = Vec::with_capacity(ModelKind::ALL.len());
    for kind in ModelKind::ALL {
        let sensor = SoftSensor::fit(&config.spec_for(kind), &train)?;
        evaluations.push(evaluate_sensor(&sensor, &test, setting)?);
        sensors.push(sensor);
    }
    Ok(SettingResult {
        setting,
        sensors,
        evaluations,
    })
}

/// Both settings times all four models, then importance and the raw_material
/// curve from the forest trained without outliers.
pub fn run_experiment(data: &Dataset, config: &ExperimentConfig) -> Result<ExperimentResult> {
    let settings = [OutlierSetting::WithOutliers, OutlierSetting::WithoutOutliers]
        .into_iter()
        .map(|s| run_setting(data, config, s))
        .collect::<Result<Vec<_>>>()?;

    let (clean_train, _) = prepare_split(data, config.train_fraction, config.seed, OutlierSetting::WithoutOutliers)?;
    let clean = &settings[1];
    let sensor = clean.sensor(ModelKind::RandomForest).expect("forest is always trained");
    let scaled = sensor.standardize(&clean_train)?;
    let forest = sensor.model.as_forest().expect("forest sensor holds a forest");
    let importance = permutation_importance(
        forest,
        &scaled,
        derive_seed(config.seed, STREAM_PERMUTATION),
        config.importance_repeats,
    )?;
    let pdp = partial_dependence(&sensor.model, &scaled, PDP_FEATURE, &GridSpec::Quantiles(DEFAULT_GRID_POINTS))?;

    Ok(ExperimentResult {
        config: *config,
        settings,
        importance,
        pdp,
    })
}

#[derive(Serialize)]
struct ReportDocument<'a> {
    config: &'a ExperimentConfig,
    reports: Vec<EvaluationReport>,
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| Error::io(path, e))
}

/// Write tables, report.json, prediction pairs, importance and PDP CSVs into
/// `dir`, returning the paths in the order written.
pub fn write_outputs(result: &ExperimentResult, dir: &Path) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let mut written = Vec::new();

    for s in &result.settings {
        let path = dir.join(format!("table_{}.txt", s.setting.slug()));
        let mut f = create(&path)?;
        f.write_all(s.table().as_bytes()).map_err(|e| Error::io(&path, e))?;
        f.flush().map_err(|e| Error::io(&path, e))?;
        written.push(path);

        for e in &s.evaluations {
            let path = dir.join(format!("pairs_{}_{}.csv", e.report.model_kind.code(), s.setting.slug()));
            e.write_pairs_csv(create(&path)?)?;
            written.push(path);
        }
    }

    let path = dir.join("report.json");
    let doc = ReportDocument {
        config: &result.config,
        reports: result.settings.iter().flat_map(|s| s.reports()).collect(),
    };
    let mut f = create(&path)?;
    serde_json::to_writer_pretty(&mut f, &doc)?;
    f.write_all(b"\n").map_err(|e| Error::io(&path, e))?;
    f.flush().map_err(|e| Error::io(&path, e))?;
    written.push(path);

    let path = dir.join("importance.csv");
    result.importance.write_csv(create(&path)?)?;
    written.push(path);

    let path = dir.join(format!("pdp_{PDP_FEATURE}.csv"));
    result.pdp.write_csv(create(&path)?)?;
    written.push(path);

    Ok(written)
}
