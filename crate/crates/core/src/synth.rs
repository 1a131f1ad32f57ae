//! Seeded synthetic process data with the published structure of the plant
//! dataset: 8 mildly correlated process parameters, an NT label driven mostly
//! by raw material (negatively) and sulfur (positively), and a handful of
//! rows whose sulfur reading is displaced far from the bulk.
//!
//! The label is built from standardized latent parameters `z`:
//!
//! ```text
//! s = -A·z_raw - B·tanh(C·z_raw) + D·tanh(1.2·z_sulfur) + E·z_sulfur
//!     + F·z_raw·z_sulfur + Σ_k minor_k·z_k
//! NT = NT_CENTER + NT_SCALE·(s + noise_std·ε)
//! ```
//!
//! In linear-only mode `s` is replaced by its first-order expansion at the
//! origin, so a least-squares fit on noiseless output recovers the raw-unit
//! coefficients reported in the manifest.

use std::fmt::Write as _;
use std::io;

use rand::seq::index::sample;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::dataset::{Dataset, ProcessRecord, FEATURE_NAMES, N_FEATURES};
use crate::error::{Error, Result};
use crate::evaluation::pearson;
use crate::seeds::rng_from;

const RAW: usize = 0;
const SULFUR: usize = 1;

/// Raw-unit location and scale of each latent parameter.
pub const FEATURE_CENTERS: [f64; N_FEATURES] = [3200.0, 420.0, -68.0, 5200.0, 2600.0, 1500.0, 1.02, 320.0];
pub const FEATURE_SCALES: [f64; N_FEATURES] = [250.0, 30.0, 3.0, 300.0, 180.0, 120.0, 0.02, 8.0];

/// NT in mg KOH per g acid.
pub const NT_CENTER: f64 = 175.0;
pub const NT_SCALE: f64 = 6.0;

/// Latent values beyond this |z| are redrawn, keeping regular rows inside 5σ.
const LATENT_LIMIT: f64 = 4.5;

/// Pairwise correlations between latent parameters; unlisted pairs are 0.
const CORRELATIONS: [(usize, usize, f64); 8] = [
    (0, 1, 0.3),
    (1, 3, 0.4),
    (3, 4, 0.3),
    (1, 6, 0.3),
    (0, 6, 0.2),
    (4, 5, 0.25),
    (6, 7, -0.2),
    (2, 4, -0.1),
];

/// Shape coefficients of the NT response.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ResponseShape {
    pub raw_linear: f64,
    pub raw_saturating: f64,
    pub raw_saturation_rate: f64,
    pub sulfur_saturating: f64,
    pub sulfur_linear: f64,
    pub interaction: f64,
    /// Linear effects of the remaining parameters (raw_material and sulfur slots are 0).
    pub minor: [f64; N_FEATURES],
}

pub const RESPONSE: ResponseShape = ResponseShape {
    raw_linear: 0.25,
    raw_saturating: 0.7,
    raw_saturation_rate: 1.5,
    sulfur_saturating: 0.9,
    sulfur_linear: 0.3,
    interaction: 0.45,
    minor: [0.0, 0.0, 0.12, 0.0, -0.10, 0.0, 0.08, 0.06],
};

const SULFUR_SATURATION_RATE: f64 = 1.2;

impl ResponseShape {
    fn signal(&self, z: &[f64; N_FEATURES]) -> f64 {
        let (r, s) = (z[RAW], z[SULFUR]);
        let minor: f64 = self.minor.iter().zip(z).map(|(c, v)| c * v).sum();
        -self.raw_linear * r - self.raw_saturating * (self.raw_saturation_rate * r).tanh()
            + self.sulfur_saturating * (SULFUR_SATURATION_RATE * s).tanh()
            + self.sulfur_linear * s
            + self.interaction * r * s
            + minor
    }

    /// Gradient of `signal` at z = 0.
    pub fn linearized(&self) -> [f64; N_FEATURES] {
        let mut c = self.minor;
        c[RAW] = -self.raw_linear - self.raw_saturating * self.raw_saturation_rate;
        c[SULFUR] = self.sulfur_saturating * SULFUR_SATURATION_RATE + self.sulfur_linear;
        c
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GeneratorConfig {
    pub n_rows: usize,
    pub n_outliers: usize,
    pub seed: u64,
    /// Label noise, in units of the latent signal.
    pub noise_std: f64,
    /// Minimum displacement of an outlier's sulfur reading, in σ.
    pub outlier_magnitude: f64,
    /// Replace the nonlinear response with its linearization.
    pub linear_only: bool,
}

impl Default for GeneratorConfig {
    fn default() -> Self {
        GeneratorConfig {
            n_rows: 14_252,
            n_outliers: 23,
            seed: 42,
            noise_std: 0.2,
            outlier_magnitude: 6.0,
            linear_only: false,
        }
    }
}

impl GeneratorConfig {
    pub fn with_seed(seed: u64) -> Self {
        GeneratorConfig {
            seed,
            ..Default::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_rows == 0 {
            return Err(Error::InvalidConfig("n_rows must be positive".into()));
        }
        if self.n_outliers >= self.n_rows {
            return Err(Error::InvalidConfig(format!(
                "n_outliers ({}) must be below n_rows ({})",
                self.n_outliers, self.n_rows
            )));
        }
        if !(self.noise_std >= 0.0 && self.noise_std.is_finite()) {
            return Err(Error::InvalidConfig("noise_std must be finite and ≥ 0".into()));
        }
        if !(self.outlier_magnitude > 0.0 && self.outlier_magnitude.is_finite()) {
            return Err(Error::InvalidConfig("outlier_magnitude must be positive".into()));
        }
        Ok(())
    }
}

/// Ground truth for a generated dataset.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeneratorManifest {
    pub config: GeneratorConfig,
    /// Sorted row indices of the injected outliers.
    pub outlier_indices: Vec<usize>,
    pub feature_names: Vec<String>,
    pub feature_centers: [f64; N_FEATURES],
    pub feature_scales: [f64; N_FEATURES],
    pub nt_center: f64,
    pub nt_scale: f64,
    pub response: ResponseShape,
    /// Latent-scale first-order coefficients (exact in linear-only mode).
    pub latent_coefficients: [f64; N_FEATURES],
    /// The same linear response expressed on raw units.
    pub raw_coefficients: [f64; N_FEATURES],
    pub raw_intercept: f64,
    /// Pearson correlation of raw_material and NT over all generated rows.
    pub raw_material_nt_correlation: f64,
    pub structure: String,
}

fn correlation_cholesky() -> [[f64; N_FEATURES]; N_FEATURES] {
    let mut c = [[0.0; N_FEATURES]; N_FEATURES];
    for (i, row) in c.iter_mut().enumerate() {
        row[i] = 1.0;
    }
    for &(i, j, v) in &CORRELATIONS {
        c[i][j] = v;
        c[j][i] = v;
    }
    let mut l = [[0.0; N_FEATURES]; N_FEATURES];
    for i in 0..N_FEATURES {
        for j in 0..=i {
            let s: f64 = (0..j).map(|k| l[i][k] * l[j][k]).sum();
            if i == j {
                let d = c[i][i] - s;
                assert!(d > 0.0, "latent correlation matrix must be positive definite");
                l[i][j] = d.sqrt();
            } else {
                l[i][j] = (c[i][j] - s) / l[j][j];
            }
        }
    }
    l
}

fn draw_latent<R: Rng>(rng: &mut R, l: &[[f64; N_FEATURES]; N_FEATURES]) -> [f64; N_FEATURES] {
    loop {
        let e: [f64; N_FEATURES] = std::array::from_fn(|_| rng.sample(StandardNormal));
        let z: [f64; N_FEATURES] = std::array::from_fn(|i| (0..=i).map(|k| l[i][k] * e[k]).sum());
        if z.iter().all(|v| v.abs() <= LATENT_LIMIT) {
            return z;
        }
    }
}

/// Draw a raw-unit dataset and its manifest.
pub fn generate(config: &GeneratorConfig) -> Result<(Dataset, GeneratorManifest)> {
    config.validate()?;
    let mut rng = rng_from(config.seed);
    let chol = correlation_cholesky();
    let linear = RESPONSE.linearized();

    let mut records: Vec<ProcessRecord> = (0..config.n_rows)
        .map(|_| {
            let z = draw_latent(&mut rng, &chol);
            let signal = if config.linear_only {
                linear.iter().zip(&z).map(|(c, v)| c * v).sum()
            } else {
                RESPONSE.signal(&z)
            };
            let eps: f64 = rng.sample(StandardNormal);
            let nt = NT_CENTER + NT_SCALE * (signal + config.noise_std * eps);
            let features = std::array::from_fn(|k| FEATURE_CENTERS[k] + FEATURE_SCALES[k] * z[k]);
            ProcessRecord::new(features, Some(nt))
        })
        .collect();

    let mut outliers = sample(&mut rng, config.n_rows, config.n_outliers).into_vec();
    outliers.sort_unstable();
    for &i in &outliers {
        let sign = if rng.random::<bool>() { 1.0 } else { -1.0 };
        let distance = config.outlier_magnitude + rng.random::<f64>();
        let r = &mut records[i];
        r.features[SULFUR] = FEATURE_CENTERS[SULFUR] + sign * distance * FEATURE_SCALES[SULFUR];
        r.outlier = true;
    }

    let data = Dataset::new(records)?;
    let nt = data.labels()?;
    let correlation = if data.len() >= 2 { pearson(&data.column(RAW), &nt)? } else { 0.0 };

    let raw_coefficients: [f64; N_FEATURES] =
        std::array::from_fn(|k| NT_SCALE * linear[k] / FEATURE_SCALES[k]);
    let raw_intercept = NT_CENTER
        - (0..N_FEATURES)
            .map(|k| raw_coefficients[k] * FEATURE_CENTERS[k])
            .sum::<f64>();

    let structure = if config.linear_only {
        "NT linear in all latent parameters".to_string()
    } else {
        "NT = saturating decrease in raw_material + saturating increase in sulfur + raw_material×sulfur interaction + minor linear terms".to_string()
    };
    let manifest = GeneratorManifest {
        config: *config,
        outlier_indices: outliers,
        feature_names: FEATURE_NAMES.iter().map(|s| s.to_string()).collect(),
        feature_centers: FEATURE_CENTERS,
        feature_scales: FEATURE_SCALES,
        nt_center: NT_CENTER,
        nt_scale: NT_SCALE,
        response: RESPONSE,
        latent_coefficients: linear,
        raw_coefficients,
        raw_intercept,
        raw_material_nt_correlation: correlation,
        structure,
    };
    Ok((data, manifest))
}

/// Pretty-printed JSON sidecar.
pub fn write_manifest<W: io::Write>(manifest: &GeneratorManifest, mut writer: W) -> Result<()> {
    serde_json::to_writer_pretty(&mut writer, manifest)?;
    writer
        .write_all(b"\n")
        .and_then(|_| writer.flush())
        .map_err(|e| Error::io("<manifest writer>", e))
}

/// Human-readable ground-truth summary.
pub fn describe(manifest: &GeneratorManifest) -> String {
    let c = &manifest.config;
    let mut out = String::new();
    let _ = writeln!(out, "synthetic process data (seed {})", c.seed);
    let _ = writeln!(out, "rows: {}  outliers: {}", c.n_rows, manifest.outlier_indices.len());
    let _ = writeln!(
        out,
        "noise_std: {}  outlier_magnitude: {}σ  linear_only: {}",
        c.noise_std, c.outlier_magnitude, c.linear_only
    );
    let _ = writeln!(out, "structure: {}", manifest.structure);
    let _ = writeln!(out, "coefficients (latent / raw units):");
    for k in 0..N_FEATURES {
        let _ = writeln!(
            out,
            "  {:<16} {:>8.4} / {:>12.6e}",
            manifest.feature_names[k], manifest.latent_coefficients[k], manifest.raw_coefficients[k]
        );
    }
    let _ = writeln!(out, "intercept (raw units): {}", manifest.raw_intercept);
    let _ = writeln!(
        out,
        "corr(raw_material, nt): {:.4}",
        manifest.raw_material_nt_correlation
    );
    let idx: Vec<String> = manifest.outlier_indices.iter().map(|i| i.to_string()).collect();
    let _ = writeln!(out, "outlier indices: [{}]", idx.join(", "));
    out
}
