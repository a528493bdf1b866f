use serde::{Deserialize, Serialize};

use crate::data::Matrix;
use crate::error::{Error, Result};
use crate::math::{logit, logit_log_loss, sigmoid};
use crate::trees::grow::{self, Criterion, GrowOptions, Growth, NodeOrder, PositionData};
use crate::trees::{check_training, Node};

pub const HESSIAN_FLOOR: f64 = 1e-16;

/// Gradient and hessian of the logistic loss with respect to the margin.
pub fn logistic_grad_hess(y: u8, margin: f64) -> (f64, f64) {
    let p = sigmoid(margin);
    (p - f64::from(y), (p * (1.0 - p)).max(HESSIAN_FLOOR))
}

/// Second-order split gain
/// `½[G_L²/(H_L+λ) + G_R²/(H_R+λ) − (G_L+G_R)²/(H_L+H_R+λ)] − γ`.
pub fn gbt_split_gain(
    g_left: f64,
    h_left: f64,
    g_right: f64,
    h_right: f64,
    lambda: f64,
    gamma: f64,
) -> f64 {
    let g = g_left + g_right;
    let h = h_left + h_right;
    0.5 * (g_left * g_left / (h_left + lambda) + g_right * g_right / (h_right + lambda)
        - g * g / (h + lambda))
        - gamma
}

/// A split is applied only with positive gain and enough hessian mass on
/// both sides.
pub fn split_admissible(gain: f64, h_left: f64, h_right: f64, min_child_weight: f64) -> bool {
    gain > 0.0 && h_left >= min_child_weight && h_right >= min_child_weight
}

/// Minimizer of `G·w + ½(H+λ)·w²`.
pub fn leaf_value(g: f64, h: f64, lambda: f64) -> f64 {
    -g / (h + lambda)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GrowthPolicy {
    DepthWise { max_depth: usize },
    LeafWise { max_leaves: usize },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GbtConfig {
    pub n_rounds: usize,
    pub learning_rate: f64,
    pub min_child_weight: f64,
    pub l2_lambda: f64,
    pub gamma: f64,
    pub growth: GrowthPolicy,
    pub seed: u64,
}

impl Default for GbtConfig {
    fn default() -> Self {
        GbtConfig {
            n_rounds: 100,
            learning_rate: 0.1,
            min_child_weight: 1.0,
            l2_lambda: 1.0,
            gamma: 0.0,
            growth: GrowthPolicy::DepthWise { max_depth: 3 },
            seed: 42,
        }
    }
}

impl GbtConfig {
    pub fn leaf_wise() -> Self {
        GbtConfig {
            growth: GrowthPolicy::LeafWise { max_leaves: 8 },
            ..Default::default()
        }
    }

    fn validate(&self) -> Result<()> {
        let ok = self.learning_rate > 0.0
            && self.learning_rate <= 1.0
            && self.min_child_weight >= 0.0
            && self.l2_lambda >= 0.0
            && self.gamma >= 0.0
            && match self.growth {
                GrowthPolicy::DepthWise { max_depth } => max_depth >= 1,
                GrowthPolicy::LeafWise { max_leaves } => max_leaves >= 1,
            };
        if ok {
            Ok(())
        } else {
            Err(Error::Config(
                "gbt needs learning_rate in (0,1], non-negative min_child_weight/lambda/gamma and a positive tree size"
                    .into(),
            ))
        }
    }
}

/// Regression tree whose leaves hold raw (unshrunk) leaf values.
pub type RegressionTree = Node<f64>;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GbtEnsemble {
    pub base_score: f64,
    pub learning_rate: f64,
    pub n_features: usize,
    pub trees: Vec<RegressionTree>,
}

impl GbtEnsemble {
    /// `base_score + η·Σ tree(x)`.
    pub fn margin(&self, x: &[f64]) -> Result<f64> {
        if x.len() != self.n_features {
            return Err(Error::Dimension {
                expected: self.n_features,
                got: x.len(),
            });
        }
        Ok(self.base_score
            + self.learning_rate * self.trees.iter().map(|t| *t.route(x)).sum::<f64>())
    }

    pub fn predict_proba(&self, x: &[f64]) -> Result<f64> {
        self.margin(x).map(sigmoid)
    }
}

struct GradientCriterion<'a> {
    grad: &'a [f64],
    hess: &'a [f64],
    lambda: f64,
    gamma: f64,
    min_child_weight: f64,
}

impl Criterion for GradientCriterion<'_> {
    type Stats = (f64, f64);

    fn empty(&self) -> (f64, f64) {
        (0.0, 0.0)
    }

    fn add(&self, stats: &mut (f64, f64), position: usize) {
        stats.0 += self.grad[position];
        stats.1 += self.hess[position];
    }

    fn difference(&self, total: &(f64, f64), part: &(f64, f64)) -> (f64, f64) {
        (total.0 - part.0, total.1 - part.1)
    }

    fn gain(
        &self,
        _parent: &(f64, f64),
        left: (&(f64, f64), usize),
        right: (&(f64, f64), usize),
    ) -> Option<f64> {
        let ((gl, hl), (gr, hr)) = (*left.0, *right.0);
        if hl < self.min_child_weight || hr < self.min_child_weight {
            return None;
        }
        Some(gbt_split_gain(gl, hl, gr, hr, self.lambda, self.gamma))
    }

    fn accept(&self, gain: f64) -> bool {
        gain > 0.0
    }
}

fn mean_log_loss(margins: &[f64], y: &[u8]) -> f64 {
    margins
        .iter()
        .zip(y)
        .map(|(&m, &t)| logit_log_loss(m, f64::from(t)))
        .sum::<f64>()
        / margins.len() as f64
}

/// Boosting with the mean training log-loss before the first round and
/// after every round.
pub fn train_gbt_traced(
    x: &Matrix,
    y: &[u8],
    config: &GbtConfig,
) -> Result<(GbtEnsemble, Vec<f64>)> {
    check_training(x, y)?;
    config.validate()?;
    let n = x.rows();
    let positive_rate = y.iter().map(|&t| f64::from(t)).sum::<f64>() / n as f64;
    let base_score = logit(positive_rate);

    let sample: Vec<usize> = (0..n).collect();
    let data = PositionData::new(&x.columns(), &sample);
    let root = NodeOrder::root(&data);
    let all_features: Vec<usize> = (0..x.cols()).collect();
    let options = GrowOptions {
        growth: match config.growth {
            GrowthPolicy::DepthWise { max_depth } => Growth::DepthWise { max_depth },
            GrowthPolicy::LeafWise { max_leaves } => Growth::LeafWise { max_leaves },
        },
        min_samples_split: 2,
    };

    let mut margins = vec![base_score; n];
    let mut grad = vec![0.0; n];
    let mut hess = vec![0.0; n];
    let mut losses = vec![mean_log_loss(&margins, y)];
    let mut trees = Vec::with_capacity(config.n_rounds);
    for _ in 0..config.n_rounds {
        for i in 0..n {
            (grad[i], hess[i]) = logistic_grad_hess(y[i], margins[i]);
        }
        let criterion = GradientCriterion {
            grad: &grad,
            hess: &hess,
            lambda: config.l2_lambda,
            gamma: config.gamma,
            min_child_weight: config.min_child_weight,
        };
        let lambda = config.l2_lambda;
        let tree = grow::grow(
            &criterion,
            &data,
            root.clone(),
            &options,
            &mut || all_features.clone(),
            &|&(g, h)| leaf_value(g, h, lambda),
        );
        for (i, m) in margins.iter_mut().enumerate() {
            *m += config.learning_rate * tree.route(x.row(i));
        }
        let loss = mean_log_loss(&margins, y);
        if !loss.is_finite() {
            return Err(Error::Numeric("gradient boosting".into()));
        }
        losses.push(loss);
        trees.push(tree);
    }
    Ok((
        GbtEnsemble {
            base_score,
            learning_rate: config.learning_rate,
            n_features: x.cols(),
            trees,
        },
        losses,
    ))
}

pub fn train_gbt(x: &Matrix, y: &[u8], config: &GbtConfig) -> Result<GbtEnsemble> {
    train_gbt_traced(x, y, config).map(|(e, _)| e)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grad_hess_values() {
        assert_eq!(logistic_grad_hess(1, 0.0), (-0.5, 0.25));
        assert_eq!(logistic_grad_hess(0, 0.0), (0.5, 0.25));
        let (g, h) = logistic_grad_hess(1, 40.0);
        assert!(g.abs() < 1e-15);
        assert!(h >= HESSIAN_FLOOR);
    }

    #[test]
    fn gain_examples() {
        assert!((gbt_split_gain(2.0, 3.0, -2.0, 3.0, 1.0, 0.0) - 1.0).abs() < 1e-12);
        let g = gbt_split_gain(1.0, 1.0, 1.0, 1.0, 1.0, 0.0);
        assert!((g + 1.0 / 6.0).abs() < 1e-12);
        assert!(!split_admissible(g, 1.0, 1.0, 0.0));
        assert!(!split_admissible(5.0, 0.5, 3.0, 1.0));
        assert!(split_admissible(5.0, 1.0, 3.0, 1.0));
    }

    #[test]
    fn zero_rounds_predicts_base_rate() {
        let x = Matrix::from_rows(&[[0.0], [1.0], [2.0], [3.0], [4.0]]);
        let y = [0, 1, 1, 0, 1];
        let cfg = GbtConfig {
            n_rounds: 0,
            ..Default::default()
        };
        let e = train_gbt(&x, &y, &cfg).unwrap();
        for q in [-10.0, 0.5, 99.0] {
            assert!((e.predict_proba(&[q]).unwrap() - 0.6).abs() < 1e-12);
        }
    }

    #[test]
    fn one_round_stump_on_four_points() {
        let x = Matrix::from_rows(&[[0.0], [1.0], [2.0], [3.0]]);
        let y = [0, 0, 1, 1];
        for growth in [
            GrowthPolicy::DepthWise { max_depth: 1 },
            GrowthPolicy::LeafWise { max_leaves: 2 },
        ] {
            let cfg = GbtConfig {
                n_rounds: 1,
                learning_rate: 1.0,
                min_child_weight: 0.0,
                l2_lambda: 0.0,
                gamma: 0.0,
                growth,
                seed: 0,
            };
            let e = train_gbt(&x, &y, &cfg).unwrap();
            match &e.trees[0] {
                Node::Split { threshold, .. } => assert_eq!(*threshold, 1.5),
                other => panic!("expected a stump, got {other:?}"),
            }
        }
    }

    #[test]
    fn invalid_config() {
        let x = Matrix::from_rows(&[[0.0], [1.0]]);
        let cfg = GbtConfig {
            learning_rate: 1.5,
            ..Default::default()
        };
        assert!(train_gbt(&x, &[0, 1], &cfg).is_err());
        assert!(train_gbt(&Matrix::zeros(0, 1), &[], &GbtConfig::default()).is_err());
    }
}
