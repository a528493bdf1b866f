//! Linear predictors: logistic regression trained by full-batch gradient
//! descent, and a linear-kernel SVM trained by hinge-loss subgradient
//! descent with Platt-scaled probabilities.

use serde::{Deserialize, Serialize};

use crate::data::Matrix;
use crate::error::{Error, Result};
use crate::math::{dot, logit_log_loss, sigmoid};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LinearKind {
    Logistic,
    Svm,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearModelParams {
    pub weights: Vec<f64>,
    pub bias: f64,
    pub kind: LinearKind,
    /// `(a, c)` with `P(y=1) = sigmoid(a * margin + c)`; SVM only.
    pub platt: Option<(f64, f64)>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GdConfig {
    pub learning_rate: f64,
    pub epochs: usize,
    pub l2_lambda: f64,
    pub tolerance: f64,
    pub seed: u64,
}

impl Default for GdConfig {
    fn default() -> Self {
        GdConfig {
            learning_rate: 0.1,
            epochs: 500,
            l2_lambda: 1e-3,
            tolerance: 1e-8,
            seed: 42,
        }
    }
}

impl GdConfig {
    fn validate(&self) -> Result<()> {
        if !(self.learning_rate > 0.0 && self.tolerance > 0.0 && self.l2_lambda >= 0.0) {
            return Err(Error::Config(
                "learning_rate and tolerance must be > 0, l2_lambda >= 0".into(),
            ));
        }
        Ok(())
    }
}

impl LinearModelParams {
    pub fn zeros(dim: usize, kind: LinearKind) -> Self {
        LinearModelParams {
            weights: vec![0.0; dim],
            bias: 0.0,
            kind,
            platt: None,
        }
    }

    /// `w·x + b`.
    pub fn decision(&self, x: &[f64]) -> Result<f64> {
        if x.len() != self.weights.len() {
            return Err(Error::Dimension {
                expected: self.weights.len(),
                got: x.len(),
            });
        }
        Ok(dot(&self.weights, x) + self.bias)
    }

    pub fn predict_proba(&self, x: &[f64]) -> Result<f64> {
        let m = self.decision(x)?;
        Ok(match (self.kind, self.platt) {
            (LinearKind::Svm, Some((a, c))) => sigmoid(a * m + c),
            (LinearKind::Svm, None) => {
                if m >= 0.0 {
                    1.0
                } else {
                    0.0
                }
            }
            (LinearKind::Logistic, _) => sigmoid(m),
        })
    }
}

pub fn logistic_predict_proba(params: &LinearModelParams, x: &[f64]) -> Result<f64> {
    Ok(sigmoid(params.decision(x)?))
}

/// Mean binary cross-entropy plus `(l2/2)·‖w‖²` and its gradient
/// `(∂/∂w, ∂/∂b)`.
pub fn logistic_objective(
    weights: &[f64],
    bias: f64,
    x: &Matrix,
    y: &[u8],
    l2_lambda: f64,
) -> (f64, Vec<f64>, f64) {
    let n = x.rows() as f64;
    let mut loss = 0.0;
    let mut grad_w = vec![0.0; weights.len()];
    let mut grad_b = 0.0;
    for (row, &label) in x.iter_rows().zip(y) {
        let z = dot(weights, row) + bias;
        let t = f64::from(label);
        loss += logit_log_loss(z, t);
        let r = sigmoid(z) - t;
        for (g, v) in grad_w.iter_mut().zip(row) {
            *g += r * v;
        }
        grad_b += r;
    }
    loss /= n;
    grad_b /= n;
    for (g, w) in grad_w.iter_mut().zip(weights) {
        *g = *g / n + l2_lambda * w;
    }
    loss += 0.5 * l2_lambda * weights.iter().map(|w| w * w).sum::<f64>();
    (loss, grad_w, grad_b)
}

fn check_training(x: &Matrix, y: &[u8]) -> Result<()> {
    if x.is_empty() {
        return Err(Error::Empty("training set"));
    }
    if x.rows() != y.len() {
        return Err(Error::Dimension {
            expected: x.rows(),
            got: y.len(),
        });
    }
    Ok(())
}

/// Gradient descent from zero; also returns the objective before every
/// epoch's update followed by the final objective.
pub fn train_logistic_traced(
    x: &Matrix,
    y: &[u8],
    config: &GdConfig,
) -> Result<(LinearModelParams, Vec<f64>)> {
    check_training(x, y)?;
    config.validate()?;
    let mut params = LinearModelParams::zeros(x.cols(), LinearKind::Logistic);
    let (mut loss, mut gw, mut gb) =
        logistic_objective(&params.weights, params.bias, x, y, config.l2_lambda);
    let mut history = vec![loss];
    for _ in 0..config.epochs {
        for (w, g) in params.weights.iter_mut().zip(&gw) {
            *w -= config.learning_rate * g;
        }
        params.bias -= config.learning_rate * gb;
        let (next, ngw, ngb) =
            logistic_objective(&params.weights, params.bias, x, y, config.l2_lambda);
        if !next.is_finite() {
            return Err(Error::Numeric("logistic regression training".into()));
        }
        history.push(next);
        let improvement = loss - next;
        (loss, gw, gb) = (next, ngw, ngb);
        if improvement < config.tolerance {
            break;
        }
    }
    Ok((params, history))
}

pub fn train_logistic(x: &Matrix, y: &[u8], config: &GdConfig) -> Result<LinearModelParams> {
    train_logistic_traced(x, y, config).map(|(p, _)| p)
}

/// Mean hinge loss over `{-1,+1}` targets plus `(l2/2)·‖w‖²`.
pub fn hinge_objective(params: &LinearModelParams, x: &Matrix, y: &[u8], l2_lambda: f64) -> f64 {
    let n = x.rows() as f64;
    let hinge: f64 = x
        .iter_rows()
        .zip(y)
        .map(|(row, &label)| {
            let s = if label == 1 { 1.0 } else { -1.0 };
            (1.0 - s * (dot(&params.weights, row) + params.bias)).max(0.0)
        })
        .sum();
    hinge / n + 0.5 * l2_lambda * params.weights.iter().map(|w| w * w).sum::<f64>()
}

/// Subgradient descent on the regularized hinge loss, keeping the best
/// iterate, followed by Platt calibration of the margins.
pub fn train_linear_svm(x: &Matrix, y: &[u8], config: &GdConfig) -> Result<LinearModelParams> {
    check_training(x, y)?;
    config.validate()?;
    let n = x.rows() as f64;
    let mut params = LinearModelParams::zeros(x.cols(), LinearKind::Svm);
    let mut best = params.clone();
    let mut best_obj = hinge_objective(&params, x, y, config.l2_lambda);

    for _ in 0..config.epochs {
        let mut gw: Vec<f64> = params
            .weights
            .iter()
            .map(|w| config.l2_lambda * w)
            .collect();
        let mut gb = 0.0;
        for (row, &label) in x.iter_rows().zip(y) {
            let s = if label == 1 { 1.0 } else { -1.0 };
            if s * (dot(&params.weights, row) + params.bias) < 1.0 {
                for (g, v) in gw.iter_mut().zip(row) {
                    *g -= s * v / n;
                }
                gb -= s / n;
            }
        }
        let norm = (gw.iter().map(|g| g * g).sum::<f64>() + gb * gb).sqrt();
        if norm < config.tolerance {
            break;
        }
        for (w, g) in params.weights.iter_mut().zip(&gw) {
            *w -= config.learning_rate * g;
        }
        params.bias -= config.learning_rate * gb;
        let obj = hinge_objective(&params, x, y, config.l2_lambda);
        if !obj.is_finite() {
            return Err(Error::Numeric("SVM training".into()));
        }
        if obj < best_obj {
            best_obj = obj;
            best = params.clone();
        }
    }

    let margins: Vec<f64> = x
        .iter_rows()
        .map(|row| dot(&best.weights, row) + best.bias)
        .collect();
    best.platt = Some(platt_scaling(&margins, y));
    Ok(best)
}

/// Fits `(a, c)` so that `sigmoid(a·m + c)` matches the labels, by Newton's
/// method on the cross-entropy against Platt's smoothed targets
/// `(N₊+1)/(N₊+2)` and `1/(N₋+2)`.
pub fn platt_scaling(margins: &[f64], labels: &[u8]) -> (f64, f64) {
    let n_pos = labels.iter().filter(|&&y| y == 1).count() as f64;
    let n_neg = labels.len() as f64 - n_pos;
    let hi = (n_pos + 1.0) / (n_pos + 2.0);
    let lo = 1.0 / (n_neg + 2.0);
    let targets: Vec<f64> = labels
        .iter()
        .map(|&y| if y == 1 { hi } else { lo })
        .collect();

    let objective = |a: f64, c: f64| -> f64 {
        margins
            .iter()
            .zip(&targets)
            .map(|(m, t)| logit_log_loss(a * m + c, *t))
            .sum()
    };

    let prior = (n_pos + 1.0) / (labels.len() as f64 + 2.0);
    let (mut a, mut c) = (0.0, (prior / (1.0 - prior)).ln());
    let mut f = objective(a, c);
    for _ in 0..100 {
        let (mut g1, mut g2, mut h11, mut h22, mut h21) = (0.0, 0.0, 1e-12, 1e-12, 0.0);
        for (m, t) in margins.iter().zip(&targets) {
            let p = sigmoid(a * m + c);
            let d = p - t;
            let w = p * (1.0 - p);
            g1 += d * m;
            g2 += d;
            h11 += w * m * m;
            h22 += w;
            h21 += w * m;
        }
        if g1.abs() < 1e-10 && g2.abs() < 1e-10 {
            break;
        }
        let det = h11 * h22 - h21 * h21;
        let da = -(h22 * g1 - h21 * g2) / det;
        let dc = -(-h21 * g1 + h11 * g2) / det;
        let gd = g1 * da + g2 * dc;
        let mut step = 1.0;
        let mut moved = false;
        while step >= 1e-10 {
            let (na, nc) = (a + step * da, c + step * dc);
            let nf = objective(na, nc);
            if nf < f + 1e-4 * step * gd {
                (a, c, f) = (na, nc, nf);
                moved = true;
                break;
            }
            step /= 2.0;
        }
        if !moved {
            break;
        }
    }
    (a, c)
}
