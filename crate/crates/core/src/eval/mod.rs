//! Metrics, cross-validation, overfit sweeps and model comparison.

mod compare;
mod cv;
mod metrics;
mod sweep;

pub use crate::model::voting_predict;
pub use compare::{compare_models, ComparisonRow, ComparisonTable, ModelOutcome};
pub use cv::{cross_validate, CvReport, MetricSummary};
pub use metrics::{compute_metrics, ConfusionMatrix, MetricsReport};
pub use sweep::{overfit_sweep, SweepCell, SweepGrid, SweepResult};
