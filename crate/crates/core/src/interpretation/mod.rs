//! Model interpretation: out-of-bag permutation importance and partial
//! dependence curves.

mod importance;
mod pdp;

pub use importance::{permutation_importance, FeatureImportance, ImportanceReport};
pub use pdp::{
    partial_dependence, partial_dependence_brute_force, smooth_curve, GridSpec,
    PartialDependenceCurve, DEFAULT_GRID_POINTS, DEFAULT_SMOOTHING_WINDOW,
};
