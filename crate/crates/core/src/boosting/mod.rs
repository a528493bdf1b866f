//! Boosted ensembles: second-order gradient-boosted trees (depth-wise and
//! leaf-wise growth), AdaBoost over weighted Gini stumps, and gradient
//! boosting over ordered target statistics.

mod adaboost;
mod gbt;
mod ordered;

pub use adaboost::{
    adaboost_alpha, train_adaboost, train_adaboost_traced, AdaBoostConfig, AdaBoostEnsemble,
    AdaBoostRound,
};
pub use gbt::{
    gbt_split_gain, leaf_value, logistic_grad_hess, split_admissible, train_gbt, train_gbt_traced,
    GbtConfig, GbtEnsemble, GrowthPolicy, RegressionTree, HESSIAN_FLOOR,
};
pub use ordered::{
    ordered_target_encode, train_catboost, CatBoostConfig, CatBoostModel, CategoryStats,
    OrderedEncoder,
};
