//! Ordered target statistics: each record's categorical value is replaced by
//! a smoothed label mean computed only from records that precede it in a
//! random permutation, so no record sees its own label.

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use super::gbt::{train_gbt, GbtConfig, GbtEnsemble, GrowthPolicy};
use crate::data::Matrix;
use crate::error::{Error, Result};
use crate::rng::{self, Purpose};
use crate::trees::check_training;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CategoryStats {
    pub value: f64,
    pub positives: f64,
    pub count: f64,
}

/// Full-training statistics used to encode unseen records.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OrderedEncoder {
    pub prior: f64,
    pub prior_weight: f64,
    /// Sorted by `value`.
    pub categories: Vec<CategoryStats>,
}

fn smoothed(positives: f64, count: f64, prior: f64, a: f64) -> f64 {
    if count == 0.0 {
        prior
    } else {
        (positives + a * prior) / (count + a)
    }
}

impl OrderedEncoder {
    pub fn encode(&self, value: f64) -> f64 {
        match self
            .categories
            .binary_search_by(|c| c.value.total_cmp(&value))
        {
            Ok(i) => {
                let c = &self.categories[i];
                smoothed(c.positives, c.count, self.prior, self.prior_weight)
            }
            Err(_) => self.prior,
        }
    }
}

fn check_permutation(permutation: &[usize], n: usize) -> Result<()> {
    let mut seen = vec![false; n];
    if permutation.len() != n {
        return Err(Error::Config(
            "permutation length differs from the column length".into(),
        ));
    }
    for &p in permutation {
        if p >= n || std::mem::replace(&mut seen[p], true) {
            return Err(Error::Config(
                "permutation is not a bijection on record indices".into(),
            ));
        }
    }
    Ok(())
}

/// Encodes `column` in `permutation` order as
/// `(positives_before + a·prior) / (count_before + a)` within each category,
/// where `prior` is the global positive rate.
pub fn ordered_target_encode(
    column: &[f64],
    labels: &[u8],
    permutation: &[usize],
    prior_weight: f64,
) -> Result<(Vec<f64>, OrderedEncoder)> {
    if column.len() != labels.len() {
        return Err(Error::Dimension {
            expected: column.len(),
            got: labels.len(),
        });
    }
    if column.is_empty() {
        return Err(Error::Empty("column to encode"));
    }
    if prior_weight <= 0.0 {
        return Err(Error::Config("prior weight must be > 0".into()));
    }
    check_permutation(permutation, column.len())?;
    let prior = labels.iter().map(|&y| f64::from(y)).sum::<f64>() / labels.len() as f64;

    let mut categories: Vec<CategoryStats> = Vec::new();
    let mut encoded = vec![0.0; column.len()];
    for &i in permutation {
        let v = column[i];
        let k = match categories.binary_search_by(|c| c.value.total_cmp(&v)) {
            Ok(k) => k,
            Err(k) => {
                categories.insert(
                    k,
                    CategoryStats {
                        value: v,
                        positives: 0.0,
                        count: 0.0,
                    },
                );
                k
            }
        };
        let c = &mut categories[k];
        encoded[i] = smoothed(c.positives, c.count, prior, prior_weight);
        c.positives += f64::from(labels[i]);
        c.count += 1.0;
    }
    Ok((
        encoded,
        OrderedEncoder {
            prior,
            prior_weight,
            categories,
        },
    ))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CatBoostConfig {
    pub gbt: GbtConfig,
    /// Columns treated as categorical.
    pub categorical: Vec<usize>,
    pub prior_weight: f64,
}

impl Default for CatBoostConfig {
    fn default() -> Self {
        CatBoostConfig {
            gbt: GbtConfig {
                growth: GrowthPolicy::DepthWise { max_depth: 4 },
                ..Default::default()
            },
            // The five binary symptoms.
            categorical: vec![2, 3, 4, 5, 6],
            prior_weight: 1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CatBoostModel {
    pub encoders: Vec<(usize, OrderedEncoder)>,
    pub gbt: GbtEnsemble,
}

impl CatBoostModel {
    pub fn encode_row(&self, x: &[f64]) -> Vec<f64> {
        let mut row = x.to_vec();
        for (j, enc) in &self.encoders {
            if let Some(v) = row.get_mut(*j) {
                *v = enc.encode(*v);
            }
        }
        row
    }

    pub fn predict_proba(&self, x: &[f64]) -> Result<f64> {
        self.gbt.predict_proba(&self.encode_row(x))
    }
}

/// Ordered target statistics on the categorical columns (one shared random
/// permutation), then standard gradient boosting on the encoded matrix.
pub fn train_catboost(x: &Matrix, y: &[u8], config: &CatBoostConfig) -> Result<CatBoostModel> {
    check_training(x, y)?;
    let n = x.rows();
    let mut permutation: Vec<usize> = (0..n).collect();
    permutation.shuffle(&mut rng::stream(config.gbt.seed, Purpose::Permutation, 0));

    let mut encoded = x.clone();
    let mut encoders = Vec::new();
    for &j in &config.categorical {
        if j >= x.cols() {
            return Err(Error::Config(format!(
                "categorical column {j} out of range"
            )));
        }
        let (col, enc) = ordered_target_encode(&x.column(j), y, &permutation, config.prior_weight)?;
        for (i, v) in col.into_iter().enumerate() {
            encoded.set(i, j, v);
        }
        encoders.push((j, enc));
    }
    let gbt = train_gbt(&encoded, y, &config.gbt)?;
    Ok(CatBoostModel { encoders, gbt })
}
