//! Trained-model container and its JSON file format.
//!
//! A model file is a single JSON object:
//!
//! ```text
//! { "format": "imbrisk-model", "version": 1,
//!   "label": "...", "feature_names": [...],
//!   "preprocess": { kept_names, medians, means, stds, ... } | null,
//!   "model": { "type": "linear" | "tree" | "ensemble", ... } }
//! ```
//!
//! Tree nodes are stored as a preorder list with child indices. Floats are
//! written in shortest round-trip form, so save/load is lossless.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::classifiers::{predict_proba_linear, tree_predict, DecisionTree, LinearModel};
use crate::data::{apply_preprocess, Dataset, PreprocessStats};
use crate::ensemble::{ensemble_importance, ensemble_predict, Ensemble};
use crate::error::{Error, Result};

pub const MODEL_FORMAT: &str = "imbrisk-model";
pub const MODEL_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase")]
pub enum TrainedClassifier {
    Linear(LinearModel),
    Tree(DecisionTree),
    Ensemble(Ensemble),
}

/// How an importance vector was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ImportanceKind {
    GiniReduction,
    AbsCoefficient,
}

impl TrainedClassifier {
    pub fn n_features(&self) -> usize {
        match self {
            TrainedClassifier::Linear(m) => m.n_features(),
            TrainedClassifier::Tree(t) => t.n_features,
            TrainedClassifier::Ensemble(e) => e.members.first().map_or(0, |t| t.n_features),
        }
    }

    /// Positive-class score in `[0, 1]`.
    pub fn score(&self, x: &[f64]) -> Result<f64> {
        match self {
            TrainedClassifier::Linear(m) => predict_proba_linear(m, x),
            TrainedClassifier::Tree(t) => tree_predict(t, x),
            TrainedClassifier::Ensemble(e) => ensemble_predict(e, x).map(|(s, _)| s),
        }
    }

    pub fn score_all(&self, ds: &Dataset) -> Result<Vec<f64>> {
        ds.rows().map(|x| self.score(x)).collect()
    }

    /// Normalized importance per feature: Gini reductions for tree models,
    /// absolute coefficients for linear ones. Sums to 1 unless all zero.
    pub fn importance(&self) -> (ImportanceKind, Vec<f64>) {
        match self {
            TrainedClassifier::Linear(m) => (
                ImportanceKind::AbsCoefficient,
                crate::ensemble::normalize(m.coefficients.iter().map(|c| c.abs()).collect()),
            ),
            TrainedClassifier::Tree(t) => (
                ImportanceKind::GiniReduction,
                crate::ensemble::normalize(t.gini_reduction_per_feature.clone()),
            ),
            TrainedClassifier::Ensemble(e) => (ImportanceKind::GiniReduction, ensemble_importance(e)),
        }
    }
}

/// Serialized model plus what is needed to score raw data with it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelFile {
    pub format: String,
    pub version: u32,
    pub label: String,
    pub feature_names: Vec<String>,
    pub preprocess: Option<PreprocessStats>,
    pub model: TrainedClassifier,
}

impl ModelFile {
    pub fn new(
        label: impl Into<String>,
        feature_names: Vec<String>,
        preprocess: Option<PreprocessStats>,
        model: TrainedClassifier,
    ) -> Self {
        Self {
            format: MODEL_FORMAT.to_string(),
            version: MODEL_VERSION,
            label: label.into(),
            feature_names,
            preprocess,
            model,
        }
    }

    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string_pretty(self).map_err(|e| Error::Model(e.to_string()))
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let file: ModelFile = serde_json::from_str(text).map_err(|e| Error::Model(e.to_string()))?;
        if file.format != MODEL_FORMAT {
            return Err(Error::Model(format!("unexpected format tag `{}`", file.format)));
        }
        if file.version != MODEL_VERSION {
            return Err(Error::Model(format!("unsupported model version {}", file.version)));
        }
        if file.feature_names.len() != file.model.n_features() {
            return Err(Error::Model("feature name count does not match the model".into()));
        }
        Ok(file)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        std::fs::write(path, self.to_json()?).map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::from_json(&text)
    }

    /// Applies the stored preprocessing (if any) and scores every row of raw `ds`.
    pub fn score_dataset(&self, ds: &Dataset) -> Result<Vec<f64>> {
        let prepared = match &self.preprocess {
            Some(stats) => apply_preprocess(ds, stats)?,
            None => {
                let absent: Vec<String> = self
                    .feature_names
                    .iter()
                    .filter(|n| ds.column_index(n).is_none())
                    .cloned()
                    .collect();
                if !absent.is_empty() {
                    return Err(Error::MissingColumns(absent));
                }
                let cols: Vec<usize> = self.feature_names.iter().filter_map(|n| ds.column_index(n)).collect();
                let mut features = Vec::with_capacity(ds.n_rows() * cols.len());
                for row in ds.rows() {
                    features.extend(cols.iter().map(|&j| row[j]));
                }
                Dataset::new(features, ds.labels().to_vec(), self.feature_names.clone())?
            }
        };
        self.model.score_all(&prepared)
    }
}
