use rand::seq::index::sample as sample_indices;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{check_training, grow_classifier, DecisionTree, TreeConfig};
use crate::data::Matrix;
use crate::error::{Error, Result};
use crate::rng::{self, Purpose};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ForestConfig {
    pub n_trees: usize,
    pub features_per_split: usize,
    pub bootstrap: bool,
    pub tree: TreeConfig,
    pub seed: u64,
}

impl Default for ForestConfig {
    fn default() -> Self {
        ForestConfig {
            n_trees: 100,
            // ⌈√7⌉
            features_per_split: 3,
            bootstrap: true,
            tree: TreeConfig::default(),
            seed: 42,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RandomForest {
    pub trees: Vec<DecisionTree>,
}

impl RandomForest {
    /// Mean of the member trees' leaf probabilities.
    pub fn predict_proba(&self, x: &[f64]) -> Result<f64> {
        let mut sum = 0.0;
        for t in &self.trees {
            sum += t.predict_proba(x)?;
        }
        Ok(sum / self.trees.len() as f64)
    }

    /// Most frequent hard vote; an even split counts as positive.
    pub fn predict_class(&self, x: &[f64]) -> Result<u8> {
        let mut positive = 0usize;
        for t in &self.trees {
            if t.predict_proba(x)? >= 0.5 {
                positive += 1;
            }
        }
        Ok(u8::from(2 * positive >= self.trees.len()))
    }
}

/// Each tree draws its bootstrap sample and its per-split feature subsets
/// from its own stream `(seed, tree index)`, so trees are built in parallel
/// and the forest does not depend on scheduling.
pub fn train_random_forest(x: &Matrix, y: &[u8], config: &ForestConfig) -> Result<RandomForest> {
    check_training(x, y)?;
    config.tree.validate()?;
    let d = x.cols();
    if config.n_trees == 0 || config.features_per_split == 0 || config.features_per_split > d {
        return Err(Error::Config(format!(
            "need n_trees >= 1 and 1 <= features_per_split <= {d}"
        )));
    }
    let columns = x.columns();
    let n = x.rows();
    let trees = (0..config.n_trees)
        .into_par_iter()
        .map(|t| {
            let mut rng = rng::stream(config.seed, Purpose::ForestTree, t as u64);
            let sample: Vec<usize> = if config.bootstrap {
                (0..n).map(|_| rng.random_range(0..n)).collect()
            } else {
                (0..n).collect()
            };
            let mut choose = || {
                let mut f = sample_indices(&mut rng, d, config.features_per_split).into_vec();
                f.sort_unstable();
                f
            };
            grow_classifier(&columns, y, &sample, None, &config.tree, &mut choose)
        })
        .collect();
    Ok(RandomForest { trees })
}
