//! Binary infection-risk classification from age, body temperature and five
//! binary symptoms.
//!
//! The crate bundles a calibrated synthetic data generator with a known
//! posterior, a family of from-scratch classifiers (linear models, CART trees,
//! random forests, gradient boosting, AdaBoost, ordered target statistics,
//! k-NN and an MLP), and the evaluation protocol around them: stratified
//! hold-out splits, k-fold cross-validation, overfit sweeps and model
//! comparison. The `infrisk` binary exposes all of it on the command line.

pub mod boosting;
pub mod cli;
pub mod data;
pub mod error;
pub mod eval;
pub mod linear;
pub mod math;
pub mod model;
pub mod neighbors;
pub mod neural;
pub mod persist;
pub mod rng;
pub mod trees;

pub use error::{Error, Result};
pub use model::{FittedModel, ModelKind, ModelSpec, Pipeline};
