use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Counts with infected (1) as the positive class.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfusionMatrix {
    pub tp: usize,
    pub fp: usize,
    pub fn_: usize,
    pub tn: usize,
}

impl ConfusionMatrix {
    pub fn from_labels(y_true: &[u8], y_pred: &[u8]) -> Result<Self> {
        if y_true.len() != y_pred.len() {
            return Err(Error::Dimension {
                expected: y_true.len(),
                got: y_pred.len(),
            });
        }
        if y_true.is_empty() {
            return Err(Error::Empty("metrics need at least one prediction"));
        }
        let mut c = ConfusionMatrix::default();
        for (&t, &p) in y_true.iter().zip(y_pred) {
            match (t, p) {
                (1, 1) => c.tp += 1,
                (0, 1) => c.fp += 1,
                (1, 0) => c.fn_ += 1,
                (0, 0) => c.tn += 1,
                _ => {
                    return Err(Error::Range(format!(
                        "labels must be 0 or 1, got ({t}, {p})"
                    )))
                }
            }
        }
        Ok(c)
    }

    pub fn total(&self) -> usize {
        self.tp + self.fp + self.fn_ + self.tn
    }
}

/// Positive-class metrics. A 0/0 ratio is reported as 0.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub accuracy: f64,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub confusion: ConfusionMatrix,
}

fn ratio(num: f64, den: f64) -> f64 {
    if den == 0.0 {
        0.0
    } else {
        num / den
    }
}

impl MetricsReport {
    pub fn from_confusion(c: ConfusionMatrix) -> Self {
        let (tp, fp, fn_, tn) = (c.tp as f64, c.fp as f64, c.fn_ as f64, c.tn as f64);
        let precision = ratio(tp, tp + fp);
        let recall = ratio(tp, tp + fn_);
        MetricsReport {
            accuracy: ratio(tp + tn, tp + fp + fn_ + tn),
            precision,
            recall,
            f1: ratio(2.0 * precision * recall, precision + recall),
            confusion: c,
        }
    }
}

pub fn compute_metrics(y_true: &[u8], y_pred: &[u8]) -> Result<MetricsReport> {
    ConfusionMatrix::from_labels(y_true, y_pred).map(MetricsReport::from_confusion)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn worked_counts() {
        let t = [1, 1, 1, 0, 0, 0, 0, 0];
        let p = [1, 1, 0, 1, 0, 0, 0, 0];
        let m = compute_metrics(&t, &p).unwrap();
        assert_eq!(m.accuracy, 0.75);
        assert!((m.precision - 2.0 / 3.0).abs() < 1e-12);
        assert!((m.recall - 2.0 / 3.0).abs() < 1e-12);
        assert!((m.f1 - 2.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn zero_division_is_zero() {
        let m = compute_metrics(&[1, 0, 1], &[0, 0, 0]).unwrap();
        assert_eq!((m.precision, m.recall, m.f1), (0.0, 0.0, 0.0));
    }

    #[test]
    fn rejects_bad_input() {
        assert!(compute_metrics(&[], &[]).is_err());
        assert!(compute_metrics(&[1], &[1, 0]).is_err());
        assert!(compute_metrics(&[2], &[1]).is_err());
    }
}
