//! Interpretable base learners: logistic regression (plain and L1) and a
//! weighted Gini decision tree.

pub mod linear;
pub mod tree;

pub use linear::{
    l1_objective, lambda_max, loss_and_gradient, predict_proba_linear, sigmoid, soft_threshold, train_l1lr,
    train_lr, LinearModel, LinearParams, TrainingLog,
};
pub use tree::{best_split, gini, train_tree, tree_predict, DecisionTree, SplitCandidate, TreeNode, TreeParams};
