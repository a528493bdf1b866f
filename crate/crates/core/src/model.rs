//! Model registry: a uniform spec → fit → predict surface over every learner,
//! and the standardize-then-predict pipeline used by evaluation and the CLI.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::boosting::{
    train_adaboost, train_catboost, train_gbt, AdaBoostConfig, AdaBoostEnsemble, CatBoostConfig,
    CatBoostModel, GbtConfig, GbtEnsemble, GrowthPolicy,
};
use crate::data::{Dataset, Matrix, Standardizer};
use crate::error::{Error, Result};
use crate::linear::{train_linear_svm, train_logistic, GdConfig, LinearModelParams};
use crate::neighbors::{KnnModel, DEFAULT_K};
use crate::neural::{train_mlp, MlpArchitecture, MlpParams, MlpTrainConfig, TrainingTrace};
use crate::trees::{
    train_decision_tree, train_random_forest, DecisionTree, ForestConfig, RandomForest, TreeConfig,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ModelKind {
    /// Constant majority-class predictor; a reference point, not one of the
    /// compared models.
    Baseline,
    Logistic,
    Svm,
    Tree,
    Forest,
    Gbt,
    GbtLeafwise,
    Adaboost,
    Catboost,
    Knn,
    Mlp,
    Voting,
}

impl ModelKind {
    /// The compared model set, in reporting order before sorting.
    pub const COMPARED: [ModelKind; 11] = [
        ModelKind::Logistic,
        ModelKind::Svm,
        ModelKind::Tree,
        ModelKind::Forest,
        ModelKind::Gbt,
        ModelKind::GbtLeafwise,
        ModelKind::Adaboost,
        ModelKind::Catboost,
        ModelKind::Knn,
        ModelKind::Mlp,
        ModelKind::Voting,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ModelKind::Baseline => "baseline",
            ModelKind::Logistic => "logistic",
            ModelKind::Svm => "svm",
            ModelKind::Tree => "tree",
            ModelKind::Forest => "forest",
            ModelKind::Gbt => "gbt",
            ModelKind::GbtLeafwise => "gbt-leafwise",
            ModelKind::Adaboost => "adaboost",
            ModelKind::Catboost => "catboost",
            ModelKind::Knn => "knn",
            ModelKind::Mlp => "mlp",
            ModelKind::Voting => "voting",
        }
    }
}

impl fmt::Display for ModelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ModelKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let kind = match s.to_ascii_lowercase().as_str() {
            "baseline" => ModelKind::Baseline,
            "logistic" => ModelKind::Logistic,
            "svm" => ModelKind::Svm,
            "tree" => ModelKind::Tree,
            "forest" => ModelKind::Forest,
            "gbt" | "gbt-depthwise" => ModelKind::Gbt,
            "gbt-leafwise" => ModelKind::GbtLeafwise,
            "adaboost" => ModelKind::Adaboost,
            "catboost" => ModelKind::Catboost,
            "knn" => ModelKind::Knn,
            "mlp" => ModelKind::Mlp,
            "voting" => ModelKind::Voting,
            other => {
                return Err(Error::Config(format!(
                    "unknown model '{other}' (expected one of baseline, {})",
                    ModelKind::COMPARED.map(|k| k.name()).join(", ")
                )))
            }
        };
        Ok(kind)
    }
}

/// Hyperparameters for one model kind.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Hyperparameters {
    Baseline,
    Linear(GdConfig),
    Tree(TreeConfig),
    Forest(ForestConfig),
    Gbt(GbtConfig),
    Adaboost(AdaBoostConfig),
    Catboost(CatBoostConfig),
    Knn {
        k: usize,
    },
    Mlp {
        architecture: MlpArchitecture,
        train: MlpTrainConfig,
    },
    Voting {
        members: Vec<ModelSpec>,
    },
}

/// A model kind, its hyperparameters and the master seed. The seed overrides
/// any seed stored inside the hyperparameters when fitting.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelSpec {
    pub kind: ModelKind,
    pub seed: u64,
    pub hyperparameters: Hyperparameters,
}

/// Which sweep axes had no effect on a model.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct InertAxes {
    pub learning_rate: bool,
    pub min_child_weight: bool,
}

impl ModelSpec {
    pub fn new(kind: ModelKind, seed: u64) -> Self {
        let hyperparameters = match kind {
            ModelKind::Baseline => Hyperparameters::Baseline,
            ModelKind::Logistic | ModelKind::Svm => Hyperparameters::Linear(GdConfig::default()),
            ModelKind::Tree => Hyperparameters::Tree(TreeConfig::default()),
            ModelKind::Forest => Hyperparameters::Forest(ForestConfig::default()),
            ModelKind::Gbt => Hyperparameters::Gbt(GbtConfig::default()),
            ModelKind::GbtLeafwise => Hyperparameters::Gbt(GbtConfig::leaf_wise()),
            ModelKind::Adaboost => Hyperparameters::Adaboost(AdaBoostConfig::default()),
            ModelKind::Catboost => Hyperparameters::Catboost(CatBoostConfig::default()),
            ModelKind::Knn => Hyperparameters::Knn { k: DEFAULT_K },
            ModelKind::Mlp => Hyperparameters::Mlp {
                architecture: MlpArchitecture::default(),
                train: MlpTrainConfig::default(),
            },
            ModelKind::Voting => Hyperparameters::Voting {
                members: ModelKind::COMPARED
                    .iter()
                    .filter(|&&k| k != ModelKind::Voting)
                    .map(|&k| ModelSpec::new(k, seed))
                    .collect(),
            },
        };
        ModelSpec {
            kind,
            seed,
            hyperparameters,
        }
    }

    /// Shrinkage / step size, where the model has one.
    pub fn set_learning_rate(&mut self, lr: f64) -> Result<bool> {
        if !(lr > 0.0 && lr.is_finite()) {
            return Err(Error::Config(format!(
                "learning rate must be positive, got {lr}"
            )));
        }
        match &mut self.hyperparameters {
            Hyperparameters::Linear(c) => c.learning_rate = lr,
            Hyperparameters::Gbt(c) => c.learning_rate = lr,
            Hyperparameters::Catboost(c) => c.gbt.learning_rate = lr,
            Hyperparameters::Adaboost(c) => c.learning_rate = lr,
            Hyperparameters::Mlp { train, .. } => train.learning_rate = lr,
            Hyperparameters::Voting { .. } => return Err(self.unsupported("learning rate")),
            Hyperparameters::Baseline
            | Hyperparameters::Tree(_)
            | Hyperparameters::Forest(_)
            | Hyperparameters::Knn { .. } => return Ok(false),
        }
        Ok(true)
    }

    /// Minimum child hessian for boosting; `⌈c⌉` samples per leaf for the
    /// Gini-grown trees and stumps.
    pub fn set_min_child_weight(&mut self, c: f64) -> Result<bool> {
        if !(c >= 0.0 && c.is_finite()) {
            return Err(Error::Config(format!(
                "min_child_weight must be >= 0, got {c}"
            )));
        }
        let leaf = (c.ceil() as usize).max(1);
        match &mut self.hyperparameters {
            Hyperparameters::Gbt(g) => g.min_child_weight = c,
            Hyperparameters::Catboost(g) => g.gbt.min_child_weight = c,
            Hyperparameters::Adaboost(a) => a.min_samples_leaf = leaf,
            Hyperparameters::Tree(t) => t.min_samples_leaf = leaf,
            Hyperparameters::Forest(f) => f.tree.min_samples_leaf = leaf,
            Hyperparameters::Voting { .. } => return Err(self.unsupported("min_child_weight")),
            Hyperparameters::Baseline
            | Hyperparameters::Linear(_)
            | Hyperparameters::Knn { .. }
            | Hyperparameters::Mlp { .. } => return Ok(false),
        }
        Ok(true)
    }

    /// Applies one sweep cell and reports which axes were no-ops.
    pub fn with_sweep_cell(&self, lr: f64, mcw: f64) -> Result<(ModelSpec, InertAxes)> {
        let mut spec = self.clone();
        let lr_used = spec.set_learning_rate(lr)?;
        let mcw_used = spec.set_min_child_weight(mcw)?;
        Ok((
            spec,
            InertAxes {
                learning_rate: !lr_used,
                min_child_weight: !mcw_used,
            },
        ))
    }

    pub fn set_max_depth(&mut self, depth: usize) -> Result<()> {
        let growth = |g: &mut GrowthPolicy| match g {
            GrowthPolicy::DepthWise { max_depth } => *max_depth = depth,
            GrowthPolicy::LeafWise { max_leaves } => *max_leaves = 1 << depth.min(20),
        };
        match &mut self.hyperparameters {
            Hyperparameters::Tree(t) => t.max_depth = depth,
            Hyperparameters::Forest(f) => f.tree.max_depth = depth,
            Hyperparameters::Gbt(g) => growth(&mut g.growth),
            Hyperparameters::Catboost(c) => growth(&mut c.gbt.growth),
            _ => return Err(self.unsupported("max depth")),
        }
        Ok(())
    }

    /// Boosting rounds, forest size or MLP epochs.
    pub fn set_rounds(&mut self, rounds: usize) -> Result<()> {
        match &mut self.hyperparameters {
            Hyperparameters::Gbt(g) => g.n_rounds = rounds,
            Hyperparameters::Catboost(c) => c.gbt.n_rounds = rounds,
            Hyperparameters::Adaboost(a) => a.n_rounds = rounds,
            Hyperparameters::Forest(f) => f.n_trees = rounds,
            Hyperparameters::Linear(c) => c.epochs = rounds,
            Hyperparameters::Mlp { train, .. } => train.epochs = rounds,
            _ => return Err(self.unsupported("rounds")),
        }
        Ok(())
    }

    pub fn set_k(&mut self, k_new: usize) -> Result<()> {
        match &mut self.hyperparameters {
            Hyperparameters::Knn { k } => *k = k_new,
            _ => return Err(self.unsupported("k")),
        }
        Ok(())
    }

    fn unsupported(&self, what: &str) -> Error {
        Error::Unsupported {
            model: self.kind.name().to_string(),
            message: format!("{what} is not a hyperparameter of this model"),
        }
    }

    /// Fits on already standardized features.
    pub fn fit(&self, x: &Matrix, y: &[u8]) -> Result<FittedModel> {
        self.fit_traced(x, y, None).map(|(m, _)| m)
    }

    /// As [`fit`](Self::fit); the MLP additionally returns its per-epoch
    /// trace, monitored on `validation` when given.
    pub fn fit_traced(
        &self,
        x: &Matrix,
        y: &[u8],
        validation: Option<(&Matrix, &[u8])>,
    ) -> Result<(FittedModel, Option<TrainingTrace>)> {
        if x.is_empty() {
            return Err(Error::Empty("training set"));
        }
        if x.rows() != y.len() {
            return Err(Error::Dimension {
                expected: x.rows(),
                got: y.len(),
            });
        }
        let seed = self.seed;
        let model = match (&self.hyperparameters, self.kind) {
            (Hyperparameters::Baseline, _) => {
                let rate = y.iter().filter(|&&v| v == 1).count() as f64 / y.len() as f64;
                FittedModel::Baseline {
                    positive_rate: rate,
                }
            }
            (Hyperparameters::Linear(c), kind) => {
                let c = GdConfig { seed, ..c.clone() };
                match kind {
                    ModelKind::Svm => FittedModel::Svm(train_linear_svm(x, y, &c)?),
                    _ => FittedModel::Logistic(train_logistic(x, y, &c)?),
                }
            }
            (Hyperparameters::Tree(c), _) => FittedModel::Tree(train_decision_tree(x, y, c)?),
            (Hyperparameters::Forest(c), _) => FittedModel::Forest(train_random_forest(
                x,
                y,
                &ForestConfig { seed, ..c.clone() },
            )?),
            (Hyperparameters::Gbt(c), kind) => {
                let m = train_gbt(x, y, &GbtConfig { seed, ..c.clone() })?;
                match kind {
                    ModelKind::GbtLeafwise => FittedModel::GbtLeafwise(m),
                    _ => FittedModel::Gbt(m),
                }
            }
            (Hyperparameters::Adaboost(c), _) => {
                FittedModel::Adaboost(train_adaboost(x, y, &AdaBoostConfig { seed, ..c.clone() })?)
            }
            (Hyperparameters::Catboost(c), _) => {
                let mut c = c.clone();
                c.gbt.seed = seed;
                FittedModel::Catboost(train_catboost(x, y, &c)?)
            }
            (Hyperparameters::Knn { k }, _) => {
                FittedModel::Knn(KnnModel::new(x.clone(), y.to_vec(), *k)?)
            }
            (
                Hyperparameters::Mlp {
                    architecture,
                    train,
                },
                _,
            ) => {
                let cfg = MlpTrainConfig {
                    seed,
                    ..train.clone()
                };
                let (params, trace) = train_mlp(x, y, validation, architecture, &cfg)?;
                return Ok((FittedModel::Mlp(params), Some(trace)));
            }
            (Hyperparameters::Voting { members }, _) => {
                if members.is_empty() {
                    return Err(Error::Empty("voting members"));
                }
                let fitted = members
                    .iter()
                    .map(|m| ModelSpec { seed, ..m.clone() }.fit(x, y))
                    .collect::<Result<Vec<_>>>()?;
                FittedModel::Voting(fitted)
            }
        };
        Ok((model, None))
    }
}

/// Learned parameters of any supported model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FittedModel {
    Baseline { positive_rate: f64 },
    Logistic(LinearModelParams),
    Svm(LinearModelParams),
    Tree(DecisionTree),
    Forest(RandomForest),
    Gbt(GbtEnsemble),
    GbtLeafwise(GbtEnsemble),
    Adaboost(AdaBoostEnsemble),
    Catboost(CatBoostModel),
    Knn(KnnModel),
    Mlp(MlpParams),
    Voting(Vec<FittedModel>),
}

impl FittedModel {
    pub fn kind(&self) -> ModelKind {
        match self {
            FittedModel::Baseline { .. } => ModelKind::Baseline,
            FittedModel::Logistic(_) => ModelKind::Logistic,
            FittedModel::Svm(_) => ModelKind::Svm,
            FittedModel::Tree(_) => ModelKind::Tree,
            FittedModel::Forest(_) => ModelKind::Forest,
            FittedModel::Gbt(_) => ModelKind::Gbt,
            FittedModel::GbtLeafwise(_) => ModelKind::GbtLeafwise,
            FittedModel::Adaboost(_) => ModelKind::Adaboost,
            FittedModel::Catboost(_) => ModelKind::Catboost,
            FittedModel::Knn(_) => ModelKind::Knn,
            FittedModel::Mlp(_) => ModelKind::Mlp,
            FittedModel::Voting(_) => ModelKind::Voting,
        }
    }

    /// `P(infected)` for one standardized feature row.
    pub fn predict_proba(&self, x: &[f64]) -> Result<f64> {
        match self {
            FittedModel::Baseline { positive_rate } => Ok(*positive_rate),
            FittedModel::Logistic(p) | FittedModel::Svm(p) => p.predict_proba(x),
            FittedModel::Tree(t) => t.predict_proba(x),
            FittedModel::Forest(f) => f.predict_proba(x),
            FittedModel::Gbt(g) | FittedModel::GbtLeafwise(g) => g.predict_proba(x),
            FittedModel::Adaboost(a) => a.predict_proba(x),
            FittedModel::Catboost(c) => c.predict_proba(x),
            FittedModel::Knn(k) => k.predict_proba(x),
            FittedModel::Mlp(m) => m.predict_proba(x),
            FittedModel::Voting(members) => voting_predict(members, x),
        }
    }

    /// Hard label: forest mode vote, AdaBoost sign, otherwise `p ≥ 0.5`.
    pub fn predict_class(&self, x: &[f64]) -> Result<u8> {
        match self {
            FittedModel::Forest(f) => f.predict_class(x),
            FittedModel::Adaboost(a) => a.predict_class(x),
            other => Ok(u8::from(other.predict_proba(x)? >= 0.5)),
        }
    }
}

/// Soft vote: unweighted mean of member probabilities.
pub fn voting_predict(members: &[FittedModel], x: &[f64]) -> Result<f64> {
    if members.is_empty() {
        return Err(Error::Empty("voting members"));
    }
    let mut total = 0.0;
    for m in members {
        total += m.predict_proba(x)?;
    }
    Ok(total / members.len() as f64)
}

/// A standardizer fitted on the training rows followed by a model fitted on
/// the standardized rows. All predictions take raw feature rows.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Pipeline {
    pub standardizer: Standardizer,
    pub model: FittedModel,
}

impl Pipeline {
    pub fn fit(spec: &ModelSpec, train: &Dataset) -> Result<Pipeline> {
        Pipeline::fit_traced(spec, train, None).map(|(p, _)| p)
    }

    pub fn fit_traced(
        spec: &ModelSpec,
        train: &Dataset,
        validation: Option<&Dataset>,
    ) -> Result<(Pipeline, Option<TrainingTrace>)> {
        let y = train.labels()?;
        let raw = train.features();
        let standardizer = Standardizer::fit(&raw)?;
        let x = standardizer.apply(&raw)?;
        let val = match validation {
            Some(v) => Some((standardizer.apply(&v.features())?, v.labels()?)),
            None => None,
        };
        let (model, trace) =
            spec.fit_traced(&x, &y, val.as_ref().map(|(m, l)| (m, l.as_slice())))?;
        Ok((
            Pipeline {
                standardizer,
                model,
            },
            trace,
        ))
    }

    pub fn predict_proba(&self, raw: &[f64]) -> Result<f64> {
        self.model.predict_proba(&self.standardizer.apply_row(raw)?)
    }

    pub fn predict_class(&self, raw: &[f64]) -> Result<u8> {
        self.model.predict_class(&self.standardizer.apply_row(raw)?)
    }

    pub fn predict_proba_all(&self, dataset: &Dataset) -> Result<Vec<f64>> {
        let x = self.standardizer.apply(&dataset.features())?;
        x.iter_rows().map(|r| self.model.predict_proba(r)).collect()
    }

    pub fn predict_class_all(&self, dataset: &Dataset) -> Result<Vec<u8>> {
        let x = self.standardizer.apply(&dataset.features())?;
        x.iter_rows().map(|r| self.model.predict_class(r)).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kind_names_round_trip() {
        for k in ModelKind::COMPARED.iter().chain([&ModelKind::Baseline]) {
            assert_eq!(k.name().parse::<ModelKind>().unwrap(), *k);
        }
        assert_eq!(
            "gbt-depthwise".parse::<ModelKind>().unwrap(),
            ModelKind::Gbt
        );
        assert!("xgb".parse::<ModelKind>().is_err());
    }

    #[test]
    fn voting_is_the_mean() {
        let m = |p| FittedModel::Baseline { positive_rate: p };
        let members = [m(0.9), m(0.8), m(0.1)];
        assert!((voting_predict(&members, &[]).unwrap() - 0.6).abs() < 1e-12);
        assert_eq!(voting_predict(&[m(0.2), m(0.8)], &[]).unwrap(), 0.5);
        assert_eq!(voting_predict(&[m(0.3)], &[]).unwrap(), 0.3);
        assert!(voting_predict(&[], &[]).is_err());
    }

    #[test]
    fn sweep_axis_mapping() {
        let (_, inert) = ModelSpec::new(ModelKind::Knn, 1)
            .with_sweep_cell(0.1, 5.0)
            .unwrap();
        assert!(inert.learning_rate && inert.min_child_weight);
        let (spec, inert) = ModelSpec::new(ModelKind::Gbt, 1)
            .with_sweep_cell(0.3, 20.0)
            .unwrap();
        assert_eq!(inert, InertAxes::default());
        match spec.hyperparameters {
            Hyperparameters::Gbt(g) => {
                assert_eq!((g.learning_rate, g.min_child_weight), (0.3, 20.0))
            }
            _ => unreachable!(),
        }
        let (spec, inert) = ModelSpec::new(ModelKind::Forest, 1)
            .with_sweep_cell(0.3, 4.5)
            .unwrap();
        assert!(inert.learning_rate && !inert.min_child_weight);
        match spec.hyperparameters {
            Hyperparameters::Forest(f) => assert_eq!(f.tree.min_samples_leaf, 5),
            _ => unreachable!(),
        }
        assert!(ModelSpec::new(ModelKind::Voting, 1)
            .with_sweep_cell(0.1, 1.0)
            .is_err());
    }
}
