//! JSON model documents.
//!
//! ```text
//! { "format_version": 1, "kind": "random_forest", "seed": 42,
//!   "hyperparameters": {...}, "standardizer": {...}, "parameters": {...} }
//! ```
//!
//! Floats are written in shortest round-trip form and parsed exactly, so a
//! loaded model predicts bit-identically to the one that was saved.

use std::fs::File;
use std::io::{BufWriter, Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use super::{
    ForestModel, ForestParams, Hyperparameters, LinearModel, MeanBaselineModel, ModelKind,
    NetworkModel, NetworkParams, RegressionModel, RegressorSpec, SoftSensor,
};
use crate::dataset::Standardizer;
use crate::error::{Error, Result};

pub const FORMAT_VERSION: u32 = 1;

#[derive(Serialize, Deserialize)]
struct ModelDocument {
    format_version: u32,
    kind: ModelKind,
    seed: u64,
    hyperparameters: Value,
    standardizer: Standardizer,
    parameters: Value,
}

fn to_document(sensor: &SoftSensor) -> Result<ModelDocument> {
    let hyperparameters = match &sensor.spec.hyperparameters {
        Hyperparameters::RandomForest(p) => serde_json::to_value(p)?,
        Hyperparameters::NeuralNet(p) => serde_json::to_value(p)?,
        Hyperparameters::Linear | Hyperparameters::MeanBaseline => json!({}),
    };
    let parameters = match &sensor.model {
        RegressionModel::RandomForest(m) => serde_json::to_value(m)?,
        RegressionModel::NeuralNet(m) => serde_json::to_value(m)?,
        RegressionModel::Linear(m) => serde_json::to_value(m)?,
        RegressionModel::MeanBaseline(m) => serde_json::to_value(m)?,
    };
    Ok(ModelDocument {
        format_version: FORMAT_VERSION,
        kind: sensor.kind(),
        seed: sensor.spec.seed,
        hyperparameters,
        standardizer: sensor.standardizer.clone(),
        parameters,
    })
}

fn from_document(doc: ModelDocument) -> Result<SoftSensor> {
    if doc.format_version != FORMAT_VERSION {
        return Err(Error::BadModelDocument(format!(
            "format version {} is not supported (expected {FORMAT_VERSION})",
            doc.format_version
        )));
    }
    let (hyperparameters, model) = match doc.kind {
        ModelKind::RandomForest => (
            Hyperparameters::RandomForest(serde_json::from_value::<ForestParams>(doc.hyperparameters)?),
            RegressionModel::RandomForest(serde_json::from_value::<ForestModel>(doc.parameters)?),
        ),
        ModelKind::NeuralNet => (
            Hyperparameters::NeuralNet(serde_json::from_value::<NetworkParams>(doc.hyperparameters)?),
            RegressionModel::NeuralNet(serde_json::from_value::<NetworkModel>(doc.parameters)?),
        ),
        ModelKind::Linear => (
            Hyperparameters::Linear,
            RegressionModel::Linear(serde_json::from_value::<LinearModel>(doc.parameters)?),
        ),
        ModelKind::MeanBaseline => (
            Hyperparameters::MeanBaseline,
            RegressionModel::MeanBaseline(serde_json::from_value::<MeanBaselineModel>(doc.parameters)?),
        ),
    };
    if let RegressionModel::RandomForest(f) = &model {
        if f.trees.len() != f.oob_indices.len() || f.trees.len() != f.tree_seeds.len() {
            return Err(Error::BadModelDocument(
                "forest tree, seed and OOB lists differ in length".to_string(),
            ));
        }
    }
    Ok(SoftSensor {
        spec: RegressorSpec::new(hyperparameters, doc.seed),
        standardizer: doc.standardizer,
        model,
    })
}

pub fn write_model<W: Write>(sensor: &SoftSensor, mut writer: W) -> Result<()> {
    serde_json::to_writer(&mut writer, &to_document(sensor)?)?;
    writer
        .write_all(b"\n")
        .map_err(|e| Error::io("<model writer>", e))
}

pub fn read_model<R: Read>(mut reader: R) -> Result<SoftSensor> {
    let mut text = String::new();
    reader
        .read_to_string(&mut text)
        .map_err(|e| Error::io("<model reader>", e))?;
    let mut de = serde_json::Deserializer::from_str(&text);
    // Deep trees nest one object per level.
    de.disable_recursion_limit();
    let doc = ModelDocument::deserialize(&mut de)?;
    de.end()?;
    from_document(doc)
}

pub fn save_model(sensor: &SoftSensor, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    write_model(sensor, &mut w)?;
    w.flush().map_err(|e| Error::io(path, e))
}

pub fn load_model(path: impl AsRef<Path>) -> Result<SoftSensor> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    read_model(std::io::BufReader::new(file))
}
