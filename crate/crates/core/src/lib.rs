//! Soft-sensor regression for predicting the neutralization number (NT) of a
//! sulfonation product from eight process parameters.
//!
//! The crate covers the whole pipeline: CSV ingestion and standardization,
//! four regressors (random forest, a small neural network, least squares and
//! a mean baseline), error metrics, out-of-bag permutation importance,
//! partial dependence curves, and a seeded synthetic data generator.

pub mod dataset;
mod error;
pub mod evaluation;
pub mod experiment;
pub mod interpretation;
pub mod models;
pub mod seeds;
pub mod synth;

pub use error::{Error, Result};
