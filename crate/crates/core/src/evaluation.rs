//! Error metrics and result tables.

use std::fmt::Write as _;
use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::models::{ModelKind, RegressionModel};

fn check(truth: &[f64], pred: &[f64]) -> Result<()> {
    if truth.len() != pred.len() {
        return Err(Error::LengthMismatch {
            left: truth.len(),
            right: pred.len(),
        });
    }
    if truth.is_empty() {
        return Err(Error::EmptyInput);
    }
    Ok(())
}

/// Mean absolute error.
pub fn mae(truth: &[f64], pred: &[f64]) -> Result<f64> {
    check(truth, pred)?;
    let s: f64 = truth.iter().zip(pred).map(|(t, p)| (t - p).abs()).sum();
    Ok(s / truth.len() as f64)
}

/// Root mean squared error.
pub fn rmse(truth: &[f64], pred: &[f64]) -> Result<f64> {
    check(truth, pred)?;
    let s: f64 = truth.iter().zip(pred).map(|(t, p)| (t - p) * (t - p)).sum();
    Ok((s / truth.len() as f64).sqrt())
}

/// Pearson correlation; exactly 0 when either side has zero variance
/// (a constant predictor carries no linear association).
pub fn pearson(truth: &[f64], pred: &[f64]) -> Result<f64> {
    check(truth, pred)?;
    if truth.len() < 2 {
        return Err(Error::TooFewRecords {
            needed: 2,
            got: truth.len(),
        });
    }
    let constant = |v: &[f64]| v.iter().all(|x| *x == v[0]);
    if constant(truth) || constant(pred) {
        return Ok(0.0);
    }
    let n = truth.len() as f64;
    let mt = truth.iter().sum::<f64>() / n;
    let mp = pred.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (t, p) in truth.iter().zip(pred) {
        let (a, b) = (t - mt, p - mp);
        sxy += a * b;
        sxx += a * a;
        syy += b * b;
    }
    if sxx == 0.0 || syy == 0.0 {
        return Ok(0.0);
    }
    Ok((sxy / (sxx.sqrt() * syy.sqrt())).clamp(-1.0, 1.0))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OutlierSetting {
    WithOutliers,
    WithoutOutliers,
}

impl OutlierSetting {
    pub fn label(&self) -> &'static str {
        match self {
            OutlierSetting::WithOutliers => "with outliers",
            OutlierSetting::WithoutOutliers => "without outliers",
        }
    }

    pub fn slug(&self) -> &'static str {
        match self {
            OutlierSetting::WithOutliers => "with_outliers",
            OutlierSetting::WithoutOutliers => "without_outliers",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvaluationReport {
    pub model_kind: ModelKind,
    pub setting: OutlierSetting,
    pub n_test: usize,
    pub mae: f64,
    pub rmse: f64,
    pub correlation: f64,
}

/// Metrics plus the (truth, prediction) pairs they were computed from.
#[derive(Debug, Clone, PartialEq)]
pub struct Evaluation {
    pub report: EvaluationReport,
    pub truth: Vec<f64>,
    pub predicted: Vec<f64>,
}

impl Evaluation {
    /// Two-column `truth,predicted` CSV.
    pub fn write_pairs_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(["truth", "predicted"])?;
        for (t, p) in self.truth.iter().zip(&self.predicted) {
            w.write_record([t.to_string(), p.to_string()])?;
        }
        w.flush().map_err(|e| Error::io("<pairs writer>", e))
    }
}

/// Score `model` on a labeled test set on the model's scale.
pub fn evaluate(model: &RegressionModel, test: &Dataset, setting: OutlierSetting) -> Result<Evaluation> {
    if test.is_empty() {
        return Err(Error::EmptyInput);
    }
    let truth = test.labels()?;
    let predicted = model.predict_all(test);
    let report = EvaluationReport {
        model_kind: model.kind(),
        setting,
        n_test: truth.len(),
        mae: mae(&truth, &predicted)?,
        rmse: rmse(&truth, &predicted)?,
        correlation: if truth.len() >= 2 { pearson(&truth, &predicted)? } else { 0.0 },
    };
    Ok(Evaluation {
        report,
        truth,
        predicted,
    })
}

/// Aligned plain-text table, one row per report, metrics to 3 decimals.
pub fn render_table(title: &str, reports: &[EvaluationReport]) -> String {
    let width = reports
        .iter()
        .map(|r| r.model_kind.label().len())
        .max()
        .unwrap_or(0)
        .max("Model".len());
    let mut out = String::new();
    let _ = writeln!(out, "{title}");
    let header = format!("{:<width$}  {:>7}  {:>7}  {:>11}", "Model", "MAE", "RMSE", "Correlation");
    let _ = writeln!(out, "{header}");
    let _ = writeln!(out, "{}", "-".repeat(header.len()));
    for r in reports {
        let _ = writeln!(
            out,
            "{:<width$}  {:>7.3}  {:>7.3}  {:>11.3}",
            r.model_kind.label(),
            r.mae,
            r.rmse,
            r.correlation
        );
    }
    out
}
