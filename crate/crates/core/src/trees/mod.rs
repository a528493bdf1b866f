//! CART classification trees with Gini impurity, and random forests.

mod forest;
pub(crate) mod grow;

use serde::{Deserialize, Serialize};

use crate::data::Matrix;
use crate::error::{Error, Result};
use grow::{best_split, Criterion, GrowOptions, Growth, NodeOrder, PositionData};

pub use forest::{train_random_forest, ForestConfig, RandomForest};

/// Binary tree; rows with `x[feature] < threshold` go left.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Node<L> {
    Split {
        feature: usize,
        threshold: f64,
        left: Box<Node<L>>,
        right: Box<Node<L>>,
    },
    Leaf(L),
}

impl<L> Node<L> {
    pub fn route(&self, x: &[f64]) -> &L {
        let mut node = self;
        loop {
            match node {
                Node::Leaf(l) => return l,
                Node::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => {
                    node = if x[*feature] < *threshold {
                        left
                    } else {
                        right
                    };
                }
            }
        }
    }

    pub fn n_nodes(&self) -> usize {
        match self {
            Node::Leaf(_) => 1,
            Node::Split { left, right, .. } => 1 + left.n_nodes() + right.n_nodes(),
        }
    }

    pub fn n_splits(&self) -> usize {
        match self {
            Node::Leaf(_) => 0,
            Node::Split { left, right, .. } => 1 + left.n_splits() + right.n_splits(),
        }
    }

    pub fn n_leaves(&self) -> usize {
        self.n_splits() + 1
    }

    pub fn depth(&self) -> usize {
        match self {
            Node::Leaf(_) => 0,
            Node::Split { left, right, .. } => 1 + left.depth().max(right.depth()),
        }
    }

    pub fn leaves(&self) -> Vec<&L> {
        match self {
            Node::Leaf(l) => vec![l],
            Node::Split { left, right, .. } => {
                let mut v = left.leaves();
                v.extend(right.leaves());
                v
            }
        }
    }
}

/// Class totals reaching a leaf (weighted when trained with sample weights).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClassLeaf {
    pub class_counts: [f64; 2],
    pub probability: f64,
}

impl ClassLeaf {
    pub fn from_counts(class_counts: [f64; 2]) -> Self {
        ClassLeaf {
            class_counts,
            probability: class_counts[1] / (class_counts[0] + class_counts[1]),
        }
    }
}

pub type TreeNode = Node<ClassLeaf>;

/// `1 - Σ pᵢ²` over the class proportions.
pub fn gini_impurity(class_counts: &[f64]) -> Result<f64> {
    let total: f64 = class_counts.iter().sum();
    if total <= 0.0 || class_counts.iter().any(|&c| c < 0.0) {
        return Err(Error::Empty("gini impurity of an empty node"));
    }
    Ok(1.0
        - class_counts
            .iter()
            .map(|c| (c / total) * (c / total))
            .sum::<f64>())
}

fn gini2(c: &[f64; 2]) -> f64 {
    let t = c[0] + c[1];
    let (p0, p1) = (c[0] / t, c[1] / t);
    1.0 - p0 * p0 - p1 * p1
}

/// Weighted Gini decrease over binary labels.
pub(crate) struct GiniCriterion<'a> {
    pub labels: &'a [u8],
    pub weights: Option<&'a [f64]>,
    pub min_samples_leaf: usize,
}

impl Criterion for GiniCriterion<'_> {
    type Stats = [f64; 2];

    fn empty(&self) -> [f64; 2] {
        [0.0; 2]
    }

    fn add(&self, stats: &mut [f64; 2], position: usize) {
        let w = self.weights.map_or(1.0, |w| w[position]);
        stats[usize::from(self.labels[position])] += w;
    }

    fn difference(&self, total: &[f64; 2], part: &[f64; 2]) -> [f64; 2] {
        [total[0] - part[0], total[1] - part[1]]
    }

    fn gain(
        &self,
        parent: &[f64; 2],
        left: (&[f64; 2], usize),
        right: (&[f64; 2], usize),
    ) -> Option<f64> {
        if left.1 < self.min_samples_leaf || right.1 < self.min_samples_leaf {
            return None;
        }
        let (wl, wr) = (left.0[0] + left.0[1], right.0[0] + right.0[1]);
        let w = wl + wr;
        if wl <= 0.0 || wr <= 0.0 {
            return None;
        }
        let decrease = gini2(parent) - (wl / w) * gini2(left.0) - (wr / w) * gini2(right.0);
        Some(decrease.max(0.0))
    }

    fn accept(&self, _gain: f64) -> bool {
        true
    }

    fn is_terminal(&self, stats: &[f64; 2]) -> bool {
        stats[0] <= 0.0 || stats[1] <= 0.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SplitCandidate {
    pub feature_index: usize,
    pub threshold: f64,
    pub impurity_decrease: f64,
}

/// Exhaustive best Gini split of `(x, y)` over `candidate_features`;
/// `None` when the labels are pure or no split satisfies
/// `min_samples_leaf`.
pub fn find_best_split(
    x: &Matrix,
    y: &[u8],
    candidate_features: &[usize],
    min_samples_leaf: usize,
) -> Option<SplitCandidate> {
    let criterion = GiniCriterion {
        labels: y,
        weights: None,
        min_samples_leaf: min_samples_leaf.max(1),
    };
    let sample: Vec<usize> = (0..x.rows()).collect();
    let data = PositionData::new(&x.columns(), &sample);
    let order = NodeOrder::root(&data);
    let parent = criterion.total(order.positions());
    if x.rows() < 2 || criterion.is_terminal(&parent) {
        return None;
    }
    let mut features = candidate_features.to_vec();
    features.sort_unstable();
    features.dedup();
    best_split(&criterion, &data, &order, &parent, &features).map(|s| SplitCandidate {
        feature_index: s.feature,
        threshold: s.threshold,
        impurity_decrease: s.gain,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SplitCriterion {
    Gini,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TreeConfig {
    pub max_depth: usize,
    pub min_samples_leaf: usize,
    pub min_samples_split: usize,
    pub criterion: SplitCriterion,
}

impl Default for TreeConfig {
    fn default() -> Self {
        TreeConfig {
            max_depth: 6,
            min_samples_leaf: 5,
            min_samples_split: 10,
            criterion: SplitCriterion::Gini,
        }
    }
}

impl TreeConfig {
    pub(crate) fn validate(&self) -> Result<()> {
        if self.max_depth < 1 || self.min_samples_leaf < 1 {
            return Err(Error::Config(
                "max_depth and min_samples_leaf must be >= 1".into(),
            ));
        }
        Ok(())
    }
}

/// A trained classification tree together with its input width.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecisionTree {
    pub n_features: usize,
    pub root: TreeNode,
}

impl DecisionTree {
    pub fn predict_proba(&self, x: &[f64]) -> Result<f64> {
        predict_tree(self, x)
    }
}

pub fn predict_tree(tree: &DecisionTree, x: &[f64]) -> Result<f64> {
    if x.len() != tree.n_features {
        return Err(Error::Dimension {
            expected: tree.n_features,
            got: x.len(),
        });
    }
    Ok(tree.root.route(x).probability)
}

/// Grows a tree on the rows listed in `sample` (repeats allowed).
pub(crate) fn grow_classifier(
    columns: &[Vec<f64>],
    labels: &[u8],
    sample: &[usize],
    weights: Option<&[f64]>,
    config: &TreeConfig,
    choose_features: &mut dyn FnMut() -> Vec<usize>,
) -> DecisionTree {
    let data = PositionData::new(columns, sample);
    let sample_labels: Vec<u8> = sample.iter().map(|&i| labels[i]).collect();
    let criterion = GiniCriterion {
        labels: &sample_labels,
        weights,
        min_samples_leaf: config.min_samples_leaf,
    };
    let root = NodeOrder::root(&data);
    let options = GrowOptions {
        growth: Growth::DepthWise {
            max_depth: config.max_depth,
        },
        min_samples_split: config.min_samples_split,
    };
    let root = grow::grow(
        &criterion,
        &data,
        root,
        &options,
        choose_features,
        &|c: &[f64; 2]| ClassLeaf::from_counts(*c),
    );
    DecisionTree {
        n_features: columns.len(),
        root,
    }
}

pub(crate) fn check_training(x: &Matrix, y: &[u8]) -> Result<()> {
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

pub fn train_decision_tree(x: &Matrix, y: &[u8], config: &TreeConfig) -> Result<DecisionTree> {
    check_training(x, y)?;
    config.validate()?;
    let sample: Vec<usize> = (0..x.rows()).collect();
    let all: Vec<usize> = (0..x.cols()).collect();
    Ok(grow_classifier(
        &x.columns(),
        y,
        &sample,
        None,
        config,
        &mut || all.clone(),
    ))
}
