//! Descriptive statistics: the feature/label correlation matrix and
//! per-class feature summaries.

use serde::Serialize;

use super::{Dataset, FEATURE_NAMES, LABEL_NAME, N_FEATURES};
use crate::error::{Error, Result};

/// Symmetric Pearson matrix over the seven features followed by the label.
#[derive(Debug, Clone, PartialEq)]
pub struct CorrelationMatrix {
    pub names: Vec<&'static str>,
    pub values: Vec<Vec<f64>>,
}

impl CorrelationMatrix {
    pub fn get(&self, a: &str, b: &str) -> Option<f64> {
        let i = self.names.iter().position(|n| *n == a)?;
        let j = self.names.iter().position(|n| *n == b)?;
        Some(self.values[i][j])
    }

    pub fn to_csv(&self) -> String {
        let mut out = format!("feature,{}\n", self.names.join(","));
        for (name, row) in self.names.iter().zip(&self.values) {
            out.push_str(name);
            for v in row {
                out.push_str(&format!(",{v:.6}"));
            }
            out.push('\n');
        }
        out
    }
}

/// Pearson coefficient; 0 when either column is constant.
pub fn pearson(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        let (da, db) = (a - mx, b - my);
        sxy += da * db;
        sxx += da * da;
        syy += db * db;
    }
    if sxx == 0.0 || syy == 0.0 {
        return 0.0;
    }
    (sxy / (sxx.sqrt() * syy.sqrt())).clamp(-1.0, 1.0)
}

pub fn pearson_correlation(dataset: &Dataset) -> Result<CorrelationMatrix> {
    let labels = dataset.labels()?;
    if dataset.len() < 2 {
        return Err(Error::Empty("correlation needs at least two records"));
    }
    let mut columns = dataset.features().columns();
    columns.push(labels.iter().map(|&y| f64::from(y)).collect());

    let m = columns.len();
    let mut values = vec![vec![0.0; m]; m];
    for i in 0..m {
        values[i][i] = 1.0;
        for j in (i + 1)..m {
            let r = pearson(&columns[i], &columns[j]);
            values[i][j] = r;
            values[j][i] = r;
        }
    }
    let mut names = FEATURE_NAMES.to_vec();
    names.push(LABEL_NAME);
    Ok(CorrelationMatrix { names, values })
}

/// Distribution summary of one feature within one class.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClassSummary {
    pub class: u8,
    pub feature: &'static str,
    pub count: usize,
    pub mean: f64,
    pub std: f64,
    pub min: f64,
    pub q1: f64,
    pub median: f64,
    pub q3: f64,
    pub max: f64,
}

impl ClassSummary {
    pub const CSV_HEADER: &'static str = "class,feature,count,mean,std,min,q1,median,q3,max";

    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{},{:.6},{:.6},{:.6},{:.6},{:.6},{:.6},{:.6}",
            self.class,
            self.feature,
            self.count,
            self.mean,
            self.std,
            self.min,
            self.q1,
            self.median,
            self.q3,
            self.max
        )
    }
}

/// Linear-interpolation quantile of sorted data.
fn quantile(sorted: &[f64], q: f64) -> f64 {
    let pos = q * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    sorted[lo] + (sorted[hi] - sorted[lo]) * (pos - lo as f64)
}

/// Per-class, per-feature summaries (the raw material of a violin plot).
pub fn class_summaries(dataset: &Dataset) -> Result<Vec<ClassSummary>> {
    let labels = dataset.labels()?;
    let x = dataset.features();
    let mut out = Vec::new();
    for class in [0u8, 1] {
        let rows: Vec<usize> = (0..labels.len()).filter(|&i| labels[i] == class).collect();
        if rows.is_empty() {
            continue;
        }
        for (j, feature) in FEATURE_NAMES.iter().enumerate().take(N_FEATURES) {
            let mut v: Vec<f64> = rows.iter().map(|&i| x.get(i, j)).collect();
            v.sort_by(f64::total_cmp);
            out.push(ClassSummary {
                class,
                feature,
                count: v.len(),
                mean: crate::math::mean(&v),
                std: crate::math::std_pop(&v),
                min: v[0],
                q1: quantile(&v, 0.25),
                median: quantile(&v, 0.5),
                q3: quantile(&v, 0.75),
                max: v[v.len() - 1],
            });
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_correlations() {
        assert!((pearson(&[1.0, 2.0, 3.0], &[-1.0, -2.0, -3.0]) + 1.0).abs() < 1e-15);
        assert!((pearson(&[1.0, 2.0, 3.0], &[1.0, 2.0, 3.0]) - 1.0).abs() < 1e-15);
        assert_eq!(pearson(&[1.0, 1.0, 1.0], &[1.0, 2.0, 3.0]), 0.0);
    }

    #[test]
    fn quantiles_interpolate() {
        let v = [1.0, 2.0, 3.0, 4.0];
        assert_eq!(quantile(&v, 0.5), 2.5);
        assert_eq!(quantile(&v, 0.0), 1.0);
        assert_eq!(quantile(&v, 1.0), 4.0);
    }
}
