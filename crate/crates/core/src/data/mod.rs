//! Patient records, datasets and everything that manipulates them before a
//! model sees them.

mod csv_io;
mod generator;
mod matrix;
mod split;
mod standardize;
mod stats;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use csv_io::{load_csv, parse_csv, to_csv_string, write_csv, CSV_HEADER};
pub use generator::{generate_synthetic, ClassProfile, GeneratorConfig, SyntheticSample};
pub use matrix::Matrix;
pub use split::{
    make_folds, train_test_split, train_test_split_indices, FoldAssignment, SplitIndices,
};
pub use standardize::Standardizer;
pub use stats::{class_summaries, pearson, pearson_correlation, ClassSummary, CorrelationMatrix};

pub const N_FEATURES: usize = 7;
pub const N_SYMPTOMS: usize = 5;

pub const FEATURE_NAMES: [&str; N_FEATURES] = [
    "age",
    "body_temperature",
    "fatigue",
    "cough",
    "body_pain",
    "sore_throat",
    "breathing_difficulty",
];

pub const LABEL_NAME: &str = "infected";

pub const AGE_RANGE: (f64, f64) = (0.0, 120.0);
pub const TEMPERATURE_RANGE: (f64, f64) = (90.0, 110.0);

/// One patient: age in years, body temperature in °F, five 0/1 symptom
/// indicators in [`FEATURE_NAMES`] order, and an optional 0/1 label.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PatientRecord {
    pub age: f64,
    pub body_temperature: f64,
    pub symptoms: [u8; N_SYMPTOMS],
    pub infected: Option<u8>,
}

impl PatientRecord {
    pub fn validate(&self) -> Result<(), String> {
        if !(AGE_RANGE.0..=AGE_RANGE.1).contains(&self.age) {
            return Err(format!("age={} outside [0, 120]", self.age));
        }
        if !(TEMPERATURE_RANGE.0..=TEMPERATURE_RANGE.1).contains(&self.body_temperature) {
            return Err(format!(
                "body_temperature={} outside [90, 110]",
                self.body_temperature
            ));
        }
        for (value, name) in self.symptoms.iter().zip(&FEATURE_NAMES[2..]) {
            if *value > 1 {
                return Err(format!("{name}={value} is not 0 or 1"));
            }
        }
        if let Some(label) = self.infected {
            if label > 1 {
                return Err(format!("infected={label} is not 0 or 1"));
            }
        }
        Ok(())
    }

    pub fn features(&self) -> [f64; N_FEATURES] {
        let mut x = [0.0; N_FEATURES];
        x[0] = self.age;
        x[1] = self.body_temperature;
        for (slot, s) in x[2..].iter_mut().zip(self.symptoms) {
            *slot = f64::from(s);
        }
        x
    }
}

/// An ordered collection of records that are either all labeled or all
/// unlabeled.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Dataset {
    records: Vec<PatientRecord>,
}

impl Dataset {
    pub fn new(records: Vec<PatientRecord>) -> Result<Self> {
        if let Some(first) = records.first() {
            let labeled = first.infected.is_some();
            if records.iter().any(|r| r.infected.is_some() != labeled) {
                return Err(Error::Range(
                    "either all records are labeled or none are".into(),
                ));
            }
        }
        for r in &records {
            r.validate().map_err(Error::Range)?;
        }
        Ok(Dataset { records })
    }

    pub fn records(&self) -> &[PatientRecord] {
        &self.records
    }

    pub fn feature_names(&self) -> &'static [&'static str; N_FEATURES] {
        &FEATURE_NAMES
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn is_labeled(&self) -> bool {
        self.records.first().is_some_and(|r| r.infected.is_some())
    }

    pub fn labels(&self) -> Result<Vec<u8>> {
        self.records
            .iter()
            .map(|r| r.infected.ok_or(Error::Unlabeled))
            .collect()
    }

    pub fn features(&self) -> Matrix {
        let mut data = Vec::with_capacity(self.len() * N_FEATURES);
        for r in &self.records {
            data.extend_from_slice(&r.features());
        }
        Matrix::from_vec(self.len(), N_FEATURES, data)
    }

    /// Records at `indices`, in the given order.
    pub fn subset(&self, indices: &[usize]) -> Dataset {
        Dataset {
            records: indices.iter().map(|&i| self.records[i]).collect(),
        }
    }

    pub fn positive_rate(&self) -> Result<f64> {
        let labels = self.labels()?;
        if labels.is_empty() {
            return Err(Error::Empty("dataset"));
        }
        Ok(labels.iter().map(|&y| f64::from(y)).sum::<f64>() / labels.len() as f64)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn record(label: Option<u8>) -> PatientRecord {
        PatientRecord {
            age: 40.0,
            body_temperature: 99.0,
            symptoms: [1, 0, 1, 0, 0],
            infected: label,
        }
    }

    #[test]
    fn mixed_labeling_is_rejected() {
        assert!(Dataset::new(vec![record(Some(1)), record(None)]).is_err());
        assert!(Dataset::new(vec![record(None), record(None)]).is_ok());
    }

    #[test]
    fn record_ranges() {
        let mut r = record(Some(0));
        assert!(r.validate().is_ok());
        r.symptoms[3] = 2;
        assert!(r.validate().unwrap_err().contains("sore_throat=2"));
        let mut r = record(Some(0));
        r.body_temperature = 89.9;
        assert!(r.validate().is_err());
        let mut r = record(Some(0));
        r.age = -1.0;
        assert!(r.validate().is_err());
    }

    #[test]
    fn feature_order_is_fixed() {
        let x = record(None).features();
        assert_eq!(x, [40.0, 99.0, 1.0, 0.0, 1.0, 0.0, 0.0]);
        assert_eq!(FEATURE_NAMES.len(), N_FEATURES);
    }
}
