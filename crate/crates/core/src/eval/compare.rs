use std::fmt::Write as _;

use rayon::prelude::*;

use super::metrics::{compute_metrics, MetricsReport};
use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::model::{FittedModel, ModelKind, ModelSpec, Pipeline};

#[derive(Debug, Clone, PartialEq)]
pub enum ModelOutcome {
    Ok(MetricsReport),
    Failed(String),
}

#[derive(Debug, Clone, PartialEq)]
pub struct ComparisonRow {
    pub model: ModelKind,
    pub outcome: ModelOutcome,
}

impl ComparisonRow {
    pub fn accuracy(&self) -> Option<f64> {
        match &self.outcome {
            ModelOutcome::Ok(m) => Some(m.accuracy),
            ModelOutcome::Failed(_) => None,
        }
    }
}

/// Rows sorted by descending test accuracy; failed models last.
#[derive(Debug, Clone, PartialEq)]
pub struct ComparisonTable {
    pub rows: Vec<ComparisonRow>,
}

impl ComparisonTable {
    pub const CSV_HEADER: &'static str = "model,accuracy,precision,recall,f1";

    pub fn get(&self, kind: ModelKind) -> Option<&ComparisonRow> {
        self.rows.iter().find(|r| r.model == kind)
    }

    pub fn to_csv(&self) -> String {
        let mut out = format!("{}\n", Self::CSV_HEADER);
        for r in &self.rows {
            match &r.outcome {
                ModelOutcome::Ok(m) => writeln!(
                    out,
                    "{},{:.6},{:.6},{:.6},{:.6}",
                    r.model, m.accuracy, m.precision, m.recall, m.f1
                ),
                ModelOutcome::Failed(_) => writeln!(out, "{},failed,failed,failed,failed", r.model),
            }
            .unwrap();
        }
        out
    }
}

fn evaluate(model: &FittedModel, pipeline_std: &Pipeline, test: &Dataset) -> Result<MetricsReport> {
    let x = pipeline_std.standardizer.apply(&test.features())?;
    let pred = x
        .iter_rows()
        .map(|r| model.predict_class(r))
        .collect::<Result<Vec<_>>>()?;
    compute_metrics(&test.labels()?, &pred)
}

/// Trains every requested model on `train` and scores it on `test`. A voting
/// spec with default members reuses the other models trained here when they
/// all succeed, since it would otherwise refit the same models with the same
/// seed.
pub fn compare_models(
    specs: &[ModelSpec],
    train: &Dataset,
    test: &Dataset,
    seed: u64,
) -> Result<ComparisonTable> {
    if specs.is_empty() {
        return Err(Error::Config("no models to compare".into()));
    }
    let specs: Vec<ModelSpec> = specs
        .iter()
        .map(|s| ModelSpec { seed, ..s.clone() })
        .collect();
    let default_voting = ModelSpec::new(ModelKind::Voting, seed);

    let fitted: Vec<Option<Result<Pipeline>>> = specs
        .par_iter()
        .map(|s| {
            if *s == default_voting {
                None
            } else {
                Some(Pipeline::fit(s, train))
            }
        })
        .collect();

    let mut rows = Vec::with_capacity(specs.len());
    for (spec, fit) in specs.iter().zip(&fitted) {
        let outcome = match fit {
            Some(Ok(p)) => evaluate(&p.model, p, test).map_err(|e| e.to_string()),
            Some(Err(e)) => Err(e.to_string()),
            None => voting_from(&specs, &fitted, train, test, spec).map_err(|e| e.to_string()),
        };
        rows.push(ComparisonRow {
            model: spec.kind,
            outcome: match outcome {
                Ok(m) => ModelOutcome::Ok(m),
                Err(e) => ModelOutcome::Failed(e),
            },
        });
    }
    rows.sort_by(|a, b| match (a.accuracy(), b.accuracy()) {
        (Some(x), Some(y)) => y.total_cmp(&x),
        (Some(_), None) => std::cmp::Ordering::Less,
        (None, Some(_)) => std::cmp::Ordering::Greater,
        (None, None) => std::cmp::Ordering::Equal,
    });
    Ok(ComparisonTable { rows })
}

fn voting_from(
    specs: &[ModelSpec],
    fitted: &[Option<Result<Pipeline>>],
    train: &Dataset,
    test: &Dataset,
    voting: &ModelSpec,
) -> Result<MetricsReport> {
    let members = match &voting.hyperparameters {
        crate::model::Hyperparameters::Voting { members } => members,
        _ => unreachable!("default voting spec"),
    };
    let mut reused = Vec::with_capacity(members.len());
    let mut standardizer = None;
    for m in members {
        let m = ModelSpec {
            seed: voting.seed,
            ..m.clone()
        };
        match specs.iter().zip(fitted).find(|(s, _)| **s == m) {
            Some((_, Some(Ok(p)))) => {
                standardizer.get_or_insert_with(|| p.clone());
                reused.push(p.model.clone());
            }
            _ => {
                let p = Pipeline::fit(voting, train)?;
                return evaluate(&p.model, &p, test);
            }
        }
    }
    let mut p = standardizer.ok_or(Error::Empty("voting members"))?;
    p.model = FittedModel::Voting(reused);
    evaluate(&p.model, &p, test)
}
