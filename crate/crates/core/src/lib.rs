//! Class-imbalanced risk modeling: resampling to swept positive ratios,
//! leak-free stratified cross-validation, logistic and tree classifiers,
//! bagging and boosting, ROC/AUC evaluation and Gini-reduction importance.

pub mod classifiers;
pub mod data;
pub mod ensemble;
pub mod error;
pub mod evaluate;
pub mod experiment;
pub mod model;
pub mod resample;
pub mod rng;

pub use data::Dataset;
pub use error::{Error, ErrorCategory, Result};
