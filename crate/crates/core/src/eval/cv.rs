use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::metrics::{compute_metrics, MetricsReport};
use crate::data::{make_folds, Dataset, FoldAssignment};
use crate::error::Result;
use crate::math::{mean, std_pop};
use crate::model::{ModelSpec, Pipeline};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MetricSummary {
    pub mean: f64,
    pub std: f64,
}

impl MetricSummary {
    fn of(values: &[f64]) -> Self {
        MetricSummary {
            mean: mean(values),
            std: std_pop(values),
        }
    }
}

/// Per-fold reports plus the unweighted mean and population standard
/// deviation of each metric across folds.
#[derive(Debug, Clone, PartialEq)]
pub struct CvReport {
    pub folds: Vec<MetricsReport>,
    pub assignment: FoldAssignment,
    pub accuracy: MetricSummary,
    pub precision: MetricSummary,
    pub recall: MetricSummary,
    pub f1: MetricSummary,
}

impl CvReport {
    pub fn k(&self) -> usize {
        self.folds.len()
    }
}

/// Stratified k-fold evaluation. Standardizer and model are fitted on the
/// training folds only.
pub fn cross_validate(
    spec: &ModelSpec,
    dataset: &Dataset,
    k: usize,
    seed: u64,
) -> Result<CvReport> {
    let assignment = make_folds(dataset, k, seed)?;
    let folds = (0..k)
        .into_par_iter()
        .map(|f| {
            let train = dataset.subset(&assignment.training(f));
            let held_out = dataset.subset(&assignment.validation(f));
            let pipeline = Pipeline::fit(spec, &train)?;
            compute_metrics(&held_out.labels()?, &pipeline.predict_class_all(&held_out)?)
        })
        .collect::<Result<Vec<_>>>()?;
    let pick =
        |f: fn(&MetricsReport) -> f64| MetricSummary::of(&folds.iter().map(f).collect::<Vec<_>>());
    Ok(CvReport {
        accuracy: pick(|m| m.accuracy),
        precision: pick(|m| m.precision),
        recall: pick(|m| m.recall),
        f1: pick(|m| m.f1),
        folds,
        assignment,
    })
}
