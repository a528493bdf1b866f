use std::fmt::Write as _;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::math::log_loss;
use crate::model::{InertAxes, ModelSpec, Pipeline};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepGrid {
    pub learning_rates: Vec<f64>,
    pub min_child_weights: Vec<f64>,
}

impl Default for SweepGrid {
    fn default() -> Self {
        SweepGrid {
            learning_rates: vec![0.01, 0.05, 0.1, 0.3],
            min_child_weights: vec![1.0, 5.0, 10.0, 20.0],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepCell {
    pub learning_rate: f64,
    pub min_child_weight: f64,
    pub train_acc: f64,
    pub val_acc: f64,
    pub train_logloss: f64,
    pub val_logloss: f64,
}

impl SweepCell {
    pub fn gap(&self) -> f64 {
        self.train_acc - self.val_acc
    }
}

/// Cells in grid order: learning rate major, min_child_weight minor.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepResult {
    pub grid: SweepGrid,
    pub cells: Vec<SweepCell>,
    pub inert: InertAxes,
}

impl SweepResult {
    pub const CSV_HEADER: &'static str =
        "learning_rate,min_child_weight,train_acc,val_acc,train_logloss,val_logloss";

    pub fn cell(&self, lr: f64, mcw: f64) -> Option<&SweepCell> {
        self.cells
            .iter()
            .find(|c| c.learning_rate == lr && c.min_child_weight == mcw)
    }

    /// Mean train-minus-validation accuracy gap over the cells at `mcw`.
    pub fn mean_gap_at_mcw(&self, mcw: f64) -> Option<f64> {
        let gaps: Vec<f64> = self
            .cells
            .iter()
            .filter(|c| c.min_child_weight == mcw)
            .map(SweepCell::gap)
            .collect();
        (!gaps.is_empty()).then(|| gaps.iter().sum::<f64>() / gaps.len() as f64)
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        if self.inert.learning_rate || self.inert.min_child_weight {
            let mut axes = Vec::new();
            if self.inert.learning_rate {
                axes.push("learning_rate");
            }
            if self.inert.min_child_weight {
                axes.push("min_child_weight");
            }
            writeln!(
                out,
                "# inert axes (no effect on this model): {}",
                axes.join(",")
            )
            .unwrap();
        }
        writeln!(out, "{}", Self::CSV_HEADER).unwrap();
        for c in &self.cells {
            writeln!(
                out,
                "{},{},{:.6},{:.6},{:.6},{:.6}",
                c.learning_rate,
                c.min_child_weight,
                c.train_acc,
                c.val_acc,
                c.train_logloss,
                c.val_logloss
            )
            .unwrap();
        }
        out
    }
}

fn accuracy_and_logloss(pipeline: &Pipeline, data: &Dataset) -> Result<(f64, f64)> {
    let y = data.labels()?;
    let p = pipeline.predict_proba_all(data)?;
    let classes = pipeline.predict_class_all(data)?;
    let correct = classes.iter().zip(&y).filter(|(a, b)| a == b).count();
    let loss: f64 = p
        .iter()
        .zip(&y)
        .map(|(&p, &t)| log_loss(p, f64::from(t)))
        .sum();
    Ok((correct as f64 / y.len() as f64, loss / y.len() as f64))
}

/// Trains one model per (learning rate, min_child_weight) cell on identical
/// data and seed, recording train and validation accuracy and log-loss.
pub fn overfit_sweep(
    spec: &ModelSpec,
    train: &Dataset,
    validation: &Dataset,
    grid: &SweepGrid,
    seed: u64,
) -> Result<SweepResult> {
    if grid.learning_rates.is_empty() || grid.min_child_weights.is_empty() {
        return Err(Error::Config(
            "sweep grid needs at least one value per axis".into(),
        ));
    }
    let base = ModelSpec {
        seed,
        ..spec.clone()
    };
    let pairs: Vec<(f64, f64)> = grid
        .learning_rates
        .iter()
        .flat_map(|&lr| grid.min_child_weights.iter().map(move |&m| (lr, m)))
        .collect();
    let (_, inert) = base.with_sweep_cell(pairs[0].0, pairs[0].1)?;
    let cells = pairs
        .par_iter()
        .map(|&(lr, mcw)| {
            let (cell_spec, _) = base.with_sweep_cell(lr, mcw)?;
            let pipeline = Pipeline::fit(&cell_spec, train)?;
            let (train_acc, train_logloss) = accuracy_and_logloss(&pipeline, train)?;
            let (val_acc, val_logloss) = accuracy_and_logloss(&pipeline, validation)?;
            Ok(SweepCell {
                learning_rate: lr,
                min_child_weight: mcw,
                train_acc,
                val_acc,
                train_logloss,
                val_logloss,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(SweepResult {
        grid: grid.clone(),
        cells,
        inert,
    })
}
