//! The end-to-end workflow: fold-first resampling grids, cross-validated
//! comparison, best-configuration selection, the ensemble stage and the
//! final report.
//!
//! Within every fold the validation rows are split off first; preprocessing
//! statistics are fitted on the training rows alone and resampling only ever
//! touches the preprocessed training rows.

mod folds;
mod grid;
mod report;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::classifiers::{LinearParams, TreeParams};
use crate::ensemble::EnsembleKind;
use crate::error::{Error, Result};
use crate::resample::Method;

pub use folds::{prepare_fold, stratified_kfold, FoldData, FoldPlan};
pub use grid::{
    fingerprint, model_seed, resample_seed, run_ensemble_stage, run_grid, FoldAudit, GridCell, GridOutput,
    VariantAudit,
};
pub use report::{
    finalize, importance_ranking, oof_roc, pca_variants, rank_order, refit, run_experiment, select_best, BestChoice,
    DataSummary, ExperimentOutcome, ExperimentReport, FoldSummary, ImportanceEntry, ImportanceRanking, LeakAudit,
    OptimalModel, PcaVariant, REPORT_FORMAT, REPORT_VERSION,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum ClassifierKind {
    #[serde(rename = "LR")]
    Lr,
    #[serde(rename = "L1LR")]
    L1lr,
    #[serde(rename = "DT")]
    Dt,
}

impl ClassifierKind {
    pub const ALL: [ClassifierKind; 3] = [ClassifierKind::Lr, ClassifierKind::L1lr, ClassifierKind::Dt];

    pub fn as_str(self) -> &'static str {
        match self {
            ClassifierKind::Lr => "LR",
            ClassifierKind::L1lr => "L1LR",
            ClassifierKind::Dt => "DT",
        }
    }
}

impl fmt::Display for ClassifierKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ClassifierKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_uppercase().as_str() {
            "LR" => Ok(ClassifierKind::Lr),
            "L1LR" => Ok(ClassifierKind::L1lr),
            "DT" => Ok(ClassifierKind::Dt),
            _ => Err(Error::param(
                "classifier",
                format!("unknown classifier `{s}` (expected LR, L1LR or DT)"),
            )),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnsembleParams {
    pub n_estimators: usize,
    pub tree: TreeParams,
}

/// Every knob of the workflow. Echoed verbatim into the report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentParams {
    pub seed: u64,
    pub folds: usize,
    pub ratios: Vec<f64>,
    pub methods: Vec<Method>,
    pub classifiers: Vec<ClassifierKind>,
    pub missing_threshold: f64,
    pub smote_k: usize,
    pub kmeans_max_iter: usize,
    pub kmeans_tol: f64,
    pub linear: LinearParams,
    pub lambda_grid: Vec<f64>,
    pub tree: TreeParams,
    pub bagging: EnsembleParams,
    pub boosting: EnsembleParams,
    /// Score threshold for recall, precision and F1.
    pub threshold: f64,
    /// AUC margin within which boosting may win on recall.
    pub tie_tolerance: f64,
    /// Positive ratio used for the PCA exports.
    pub pca_ratio: f64,
}

/// `0.1, 0.2, ..., 0.9`.
pub fn default_ratios() -> Vec<f64> {
    (1..=9).map(|k| k as f64 / 10.0).collect()
}

impl ExperimentParams {
    pub fn new(seed: u64) -> Self {
        Self {
            seed,
            folds: 10,
            ratios: default_ratios(),
            methods: Method::RESAMPLERS.to_vec(),
            classifiers: ClassifierKind::ALL.to_vec(),
            missing_threshold: 0.7,
            smote_k: 5,
            kmeans_max_iter: 100,
            kmeans_tol: 1e-6,
            linear: LinearParams::default(),
            lambda_grid: vec![0.001, 0.01, 0.1],
            tree: TreeParams::default(),
            bagging: EnsembleParams {
                n_estimators: 50,
                tree: TreeParams::default(),
            },
            boosting: EnsembleParams {
                n_estimators: 50,
                tree: TreeParams {
                    max_depth: 3,
                    min_samples_leaf: 5,
                },
            },
            threshold: 0.5,
            tie_tolerance: 0.005,
            pca_ratio: 0.5,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.folds < 2 {
            return Err(Error::param("folds", "must be at least 2"));
        }
        if let Some(r) = self.ratios.iter().find(|r| !(**r > 0.0 && **r < 1.0)) {
            return Err(Error::param("ratios", format!("{r} is not strictly between 0 and 1")));
        }
        if self.methods.contains(&Method::None) {
            return Err(Error::param("methods", "NONE is implied by the baseline cells; list only resamplers"));
        }
        if self.classifiers.is_empty() {
            return Err(Error::param("classifiers", "at least one classifier is required"));
        }
        if !(0.0..=1.0).contains(&self.missing_threshold) {
            return Err(Error::param("missing_threshold", "must lie in [0, 1]"));
        }
        if self.smote_k == 0 {
            return Err(Error::param("smote_k", "must be at least 1"));
        }
        if self.classifiers.contains(&ClassifierKind::L1lr)
            && (self.lambda_grid.is_empty() || self.lambda_grid.iter().any(|l| !(*l >= 0.0) || !l.is_finite()))
        {
            return Err(Error::param("lambda_grid", "must be a nonempty list of non-negative numbers"));
        }
        if self.bagging.n_estimators == 0 || self.boosting.n_estimators == 0 {
            return Err(Error::param("n_estimators", "must be at least 1"));
        }
        if !(self.pca_ratio > 0.0 && self.pca_ratio < 1.0) {
            return Err(Error::param("pca_ratio", "must lie strictly between 0 and 1"));
        }
        if !(self.tie_tolerance >= 0.0) {
            return Err(Error::param("tie_tolerance", "must be non-negative"));
        }
        Ok(())
    }
}

/// `0.5 -> "50%"`, `0.074 -> "7.4%"`.
pub fn percent_label(ratio: f64) -> String {
    let tenths = (ratio * 1000.0).round() / 10.0;
    format!("{tenths}%")
}

/// Model label in the form `<clf>_<method>_<ratio>[_<ensemble>]`, with
/// `original` standing in for the unresampled data.
pub fn model_label(classifier: ClassifierKind, ensemble: Option<EnsembleKind>, method: Method, ratio: f64) -> String {
    let method = match method {
        Method::None => "original".to_string(),
        m => m.as_str().to_string(),
    };
    let mut label = format!("{classifier}_{method}_{}", percent_label(ratio));
    if let Some(e) = ensemble {
        label.push('_');
        label.push_str(e.as_str());
    }
    label
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn labels_follow_convention() {
        assert_eq!(
            model_label(ClassifierKind::Dt, Some(EnsembleKind::Boosting), Method::Smote, 0.5),
            "DT_SMOTE_50%_boosting"
        );
        assert_eq!(model_label(ClassifierKind::Lr, None, Method::None, 0.074), "LR_original_7.4%");
        assert_eq!(model_label(ClassifierKind::L1lr, None, Method::Smote, 0.2), "L1LR_SMOTE_20%");
    }

    #[test]
    fn default_grid_is_tenths() {
        let r = default_ratios();
        assert_eq!(r.len(), 9);
        assert_eq!(r[0], 0.1);
        assert_eq!(r[8], 0.9);
        assert!(ExperimentParams::new(1).validate().is_ok());
    }

    #[test]
    fn validation_names_fields() {
        let mut p = ExperimentParams::new(1);
        p.ratios.push(1.0);
        assert!(matches!(p.validate(), Err(Error::InvalidParameter { name: "ratios", .. })));
        let mut p = ExperimentParams::new(1);
        p.folds = 1;
        assert!(matches!(p.validate(), Err(Error::InvalidParameter { name: "folds", .. })));
    }
}
