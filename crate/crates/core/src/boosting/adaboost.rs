use serde::{Deserialize, Serialize};

use crate::data::Matrix;
use crate::error::{Error, Result};
use crate::math::sigmoid;
use crate::trees::{check_training, grow_classifier, DecisionTree, TreeConfig};

const ERROR_CLAMP: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AdaBoostConfig {
    /// Maximum number of weak learners `T`.
    pub n_rounds: usize,
    /// Multiplier on every `α_t`; 1 is classic AdaBoost.
    pub learning_rate: f64,
    pub min_samples_leaf: usize,
    pub seed: u64,
}

impl Default for AdaBoostConfig {
    fn default() -> Self {
        AdaBoostConfig {
            n_rounds: 100,
            learning_rate: 1.0,
            min_samples_leaf: 1,
            seed: 42,
        }
    }
}

/// `H(x) = sign(Σ α_t h_t(x))` over depth-one trees voting ±1.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AdaBoostEnsemble {
    pub stumps: Vec<DecisionTree>,
    pub alphas: Vec<f64>,
}

/// `½·ln((1−ε)/ε)` with ε clamped to `[1e-10, 1−1e-10]`.
pub fn adaboost_alpha(weighted_error: f64) -> f64 {
    let e = weighted_error.clamp(ERROR_CLAMP, 1.0 - ERROR_CLAMP);
    0.5 * ((1.0 - e) / e).ln()
}

fn stump_vote(stump: &DecisionTree, x: &[f64]) -> f64 {
    let leaf = stump.root.route(x);
    if leaf.class_counts[1] >= leaf.class_counts[0] {
        1.0
    } else {
        -1.0
    }
}

impl AdaBoostEnsemble {
    pub fn len(&self) -> usize {
        self.alphas.len()
    }

    pub fn is_empty(&self) -> bool {
        self.alphas.is_empty()
    }

    /// `Σ α_t h_t(x)`.
    pub fn score(&self, x: &[f64]) -> Result<f64> {
        let mut s = 0.0;
        for (stump, alpha) in self.stumps.iter().zip(&self.alphas) {
            if x.len() != stump.n_features {
                return Err(Error::Dimension {
                    expected: stump.n_features,
                    got: x.len(),
                });
            }
            s += alpha * stump_vote(stump, x);
        }
        Ok(s)
    }

    /// Sign of the weighted vote, with `sign(0)` read as positive.
    pub fn predict_class(&self, x: &[f64]) -> Result<u8> {
        Ok(u8::from(self.score(x)? >= 0.0))
    }

    /// `sigmoid(2·Σ α_t h_t(x))`.
    pub fn predict_proba(&self, x: &[f64]) -> Result<f64> {
        Ok(sigmoid(2.0 * self.score(x)?))
    }
}

/// Bookkeeping for one boosting round.
#[derive(Debug, Clone, PartialEq)]
pub struct AdaBoostRound {
    pub weighted_error: f64,
    pub alpha: f64,
    /// Sample weights after the round's update and renormalization.
    pub weights: Vec<f64>,
}

pub fn train_adaboost_traced(
    x: &Matrix,
    y: &[u8],
    config: &AdaBoostConfig,
) -> Result<(AdaBoostEnsemble, Vec<AdaBoostRound>)> {
    check_training(x, y)?;
    if config.learning_rate <= 0.0 || config.min_samples_leaf == 0 {
        return Err(Error::Config(
            "adaboost needs learning_rate > 0 and min_samples_leaf >= 1".into(),
        ));
    }
    let n = x.rows();
    let columns = x.columns();
    let sample: Vec<usize> = (0..n).collect();
    let all: Vec<usize> = (0..x.cols()).collect();
    let signs: Vec<f64> = y.iter().map(|&t| if t == 1 { 1.0 } else { -1.0 }).collect();
    let stump_config = TreeConfig {
        max_depth: 1,
        min_samples_leaf: config.min_samples_leaf,
        min_samples_split: 2,
        ..Default::default()
    };

    let mut weights = vec![1.0 / n as f64; n];
    let mut ensemble = AdaBoostEnsemble {
        stumps: Vec::new(),
        alphas: Vec::new(),
    };
    let mut rounds = Vec::new();
    for _ in 0..config.n_rounds {
        let stump = grow_classifier(
            &columns,
            y,
            &sample,
            Some(&weights),
            &stump_config,
            &mut || all.clone(),
        );
        let votes: Vec<f64> = (0..n).map(|i| stump_vote(&stump, x.row(i))).collect();
        let error: f64 = (0..n)
            .filter(|&i| votes[i] != signs[i])
            .map(|i| weights[i])
            .sum();
        if error >= 0.5 {
            break;
        }
        let alpha = config.learning_rate * adaboost_alpha(error);
        for i in 0..n {
            weights[i] *= (-alpha * signs[i] * votes[i]).exp();
        }
        let total: f64 = weights.iter().sum();
        if !(total.is_finite() && total > 0.0) {
            return Err(Error::Numeric("adaboost weight update".into()));
        }
        for w in weights.iter_mut() {
            *w /= total;
        }
        ensemble.stumps.push(stump);
        ensemble.alphas.push(alpha);
        rounds.push(AdaBoostRound {
            weighted_error: error,
            alpha,
            weights: weights.clone(),
        });
        if error == 0.0 {
            break;
        }
    }
    Ok((ensemble, rounds))
}

pub fn train_adaboost(x: &Matrix, y: &[u8], config: &AdaBoostConfig) -> Result<AdaBoostEnsemble> {
    train_adaboost_traced(x, y, config).map(|(e, _)| e)
}
