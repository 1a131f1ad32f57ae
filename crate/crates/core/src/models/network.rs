//! Single-hidden-layer perceptron: 8 inputs, 4 sigmoid units, 1 linear output.

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::dataset::{Dataset, Features, N_FEATURES};
use crate::error::{Error, Result};
use crate::seeds::rng_from;

pub const N_HIDDEN: usize = 4;
/// Total trainable parameters: hidden weights, hidden biases, output weights, output bias.
pub const N_PARAMS: usize = N_HIDDEN * N_FEATURES + N_HIDDEN + N_HIDDEN + 1;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NetworkParams {
    pub learning_rate: f64,
    pub batch_size: usize,
    pub epochs: usize,
    pub momentum: f64,
}

impl Default for NetworkParams {
    fn default() -> Self {
        NetworkParams {
            learning_rate: 0.3,
            batch_size: 100,
            epochs: 500,
            momentum: 0.2,
        }
    }
}

impl NetworkParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return Err(Error::InvalidHyperparameters(format!(
                "learning rate must be positive, got {}",
                self.learning_rate
            )));
        }
        if self.batch_size == 0 {
            return Err(Error::InvalidHyperparameters("batch size must be ≥ 1".into()));
        }
        if !(0.0..1.0).contains(&self.momentum) {
            return Err(Error::InvalidHyperparameters(format!(
                "momentum must lie in [0, 1), got {}",
                self.momentum
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NetworkModel {
    /// Row `h` holds the input weights of hidden unit `h`.
    pub hidden_weights: [[f64; N_FEATURES]; N_HIDDEN],
    pub hidden_biases: [f64; N_HIDDEN],
    pub output_weights: [f64; N_HIDDEN],
    pub output_bias: f64,
}

#[inline]
fn sigmoid(z: f64) -> f64 {
    1.0 / (1.0 + (-z).exp())
}

impl NetworkModel {
    pub fn zeros() -> Self {
        NetworkModel::from_params(&[0.0; N_PARAMS])
    }

    /// Uniform draws in [-0.5, 0.5] for every parameter.
    pub fn random<R: Rng>(rng: &mut R) -> Self {
        let p: [f64; N_PARAMS] = std::array::from_fn(|_| rng.random_range(-0.5..=0.5));
        NetworkModel::from_params(&p)
    }

    /// Flatten in storage order: hidden weights row-major, hidden biases,
    /// output weights, output bias.
    pub fn params(&self) -> [f64; N_PARAMS] {
        let mut p = [0.0; N_PARAMS];
        let mut k = 0;
        for row in &self.hidden_weights {
            for &w in row {
                p[k] = w;
                k += 1;
            }
        }
        for &b in &self.hidden_biases {
            p[k] = b;
            k += 1;
        }
        for &w in &self.output_weights {
            p[k] = w;
            k += 1;
        }
        p[k] = self.output_bias;
        p
    }

    pub fn from_params(p: &[f64; N_PARAMS]) -> Self {
        let hw = N_HIDDEN * N_FEATURES;
        NetworkModel {
            hidden_weights: std::array::from_fn(|h| {
                std::array::from_fn(|j| p[h * N_FEATURES + j])
            }),
            hidden_biases: std::array::from_fn(|h| p[hw + h]),
            output_weights: std::array::from_fn(|h| p[hw + N_HIDDEN + h]),
            output_bias: p[N_PARAMS - 1],
        }
    }

    fn hidden(&self, x: &Features) -> [f64; N_HIDDEN] {
        std::array::from_fn(|h| {
            let z = self.hidden_biases[h]
                + self.hidden_weights[h].iter().zip(x).map(|(w, v)| w * v).sum::<f64>();
            sigmoid(z)
        })
    }

    pub fn predict(&self, x: &Features) -> f64 {
        let a = self.hidden(x);
        self.output_bias + self.output_weights.iter().zip(&a).map(|(w, v)| w * v).sum::<f64>()
    }

    /// Loss `1/(2B) Σ (ŷ − y)²` over the batch and its gradient in
    /// `params()` order.
    pub fn loss_and_gradient(&self, x: &[Features], y: &[f64]) -> (f64, [f64; N_PARAMS]) {
        let b = x.len() as f64;
        let hw = N_HIDDEN * N_FEATURES;
        let mut grad = [0.0; N_PARAMS];
        let mut loss = 0.0;
        for (xi, &yi) in x.iter().zip(y) {
            let a = self.hidden(xi);
            let out = self.output_bias
                + self.output_weights.iter().zip(&a).map(|(w, v)| w * v).sum::<f64>();
            let err = out - yi;
            loss += err * err;
            for h in 0..N_HIDDEN {
                grad[hw + N_HIDDEN + h] += err * a[h];
                let delta = err * self.output_weights[h] * a[h] * (1.0 - a[h]);
                grad[hw + h] += delta;
                for j in 0..N_FEATURES {
                    grad[h * N_FEATURES + j] += delta * xi[j];
                }
            }
            grad[N_PARAMS - 1] += err;
        }
        grad.iter_mut().for_each(|g| *g /= b);
        (loss / (2.0 * b), grad)
    }

    pub fn loss(&self, x: &[Features], y: &[f64]) -> f64 {
        let sse: f64 = x
            .iter()
            .zip(y)
            .map(|(xi, yi)| {
                let e = self.predict(xi) - yi;
                e * e
            })
            .sum();
        sse / (2.0 * x.len() as f64)
    }
}

/// Mini-batch gradient descent with momentum.
///
/// Weights start uniform in [-0.5, 0.5]; each epoch visits the records in a
/// fresh seeded order, and the final batch of an epoch may be short.
pub fn fit_network(train: &Dataset, params: &NetworkParams, seed: u64) -> Result<NetworkModel> {
    params.validate()?;
    let n = train.len();
    if n < params.batch_size {
        return Err(Error::InvalidHyperparameters(format!(
            "batch size {} exceeds the {n} training records",
            params.batch_size
        )));
    }
    let x = train.feature_rows();
    let y = train.labels()?;

    let mut rng = rng_from(seed);
    let mut model = NetworkModel::random(&mut rng);
    let mut theta = model.params();
    let mut velocity = [0.0; N_PARAMS];
    let mut order: Vec<usize> = (0..n).collect();
    let mut bx: Vec<Features> = Vec::with_capacity(params.batch_size);
    let mut by: Vec<f64> = Vec::with_capacity(params.batch_size);

    for epoch in 0..params.epochs {
        order.shuffle(&mut rng);
        for chunk in order.chunks(params.batch_size) {
            bx.clear();
            by.clear();
            bx.extend(chunk.iter().map(|&i| x[i]));
            by.extend(chunk.iter().map(|&i| y[i]));
            let (loss, grad) = model.loss_and_gradient(&bx, &by);
            if !loss.is_finite() {
                return Err(Error::DivergedTraining { epoch });
            }
            for ((t, v), g) in theta.iter_mut().zip(velocity.iter_mut()).zip(&grad) {
                *v = params.momentum * *v - params.learning_rate * g;
                *t += *v;
            }
            if theta.iter().any(|t| !t.is_finite()) {
                return Err(Error::DivergedTraining { epoch });
            }
            model = NetworkModel::from_params(&theta);
        }
    }
    Ok(model)
}
