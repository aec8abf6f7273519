use std::collections::hash_map::DefaultHasher;
use std::hash::{Hash, Hasher};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::folds::{prepare_fold, FoldData, FoldPlan};
use super::{model_label, ClassifierKind, ExperimentParams};
use crate::classifiers::{train_l1lr, train_lr, train_tree};
use crate::data::{positive_rate, Dataset, PreprocessStats};
use crate::ensemble::{bagging_train, boosting_train, EnsembleKind};
use crate::error::Result;
use crate::evaluate::MetricSet;
use crate::model::TrainedClassifier;
use crate::resample::{resample_tracked, Method, ResampleSpec};
use crate::rng::{derive_seed, ratio_tag};

const TAG_RESAMPLE: u64 = 1;
const TAG_MODEL: u64 = 2;
pub(super) const TAG_BAGGING: u64 = 10;
pub(super) const TAG_BOOSTING: u64 = 11;

/// Seed of the resampled training set for one (fold, method, ratio).
pub fn resample_seed(seed: u64, fold: usize, method: Method, ratio: f64) -> u64 {
    derive_seed(seed, &[TAG_RESAMPLE, fold as u64, method.tag(), ratio_tag(ratio)])
}

/// Seed of a model trained on one (fold, method, ratio) training set.
pub fn model_seed(seed: u64, fold: usize, method: Method, ratio: f64, model_tag: u64) -> u64 {
    derive_seed(seed, &[TAG_MODEL, fold as u64, method.tag(), ratio_tag(ratio), model_tag])
}

/// Order-sensitive hash of a dataset's feature bits and labels.
pub fn fingerprint(ds: &Dataset) -> u64 {
    let mut h = DefaultHasher::new();
    ds.n_rows().hash(&mut h);
    ds.feature_names().hash(&mut h);
    for v in ds.features() {
        v.to_bits().hash(&mut h);
    }
    ds.labels().hash(&mut h);
    h.finish()
}

/// Cross-validated results for one (classifier, ensemble, method, ratio).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridCell {
    pub label: String,
    pub classifier: ClassifierKind,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub ensemble: Option<EnsembleKind>,
    pub method: Method,
    pub target_positive: f64,
    /// Chosen L1 penalty (L1LR cells only).
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub lambda: Option<f64>,
    /// Mean validation AUC of every penalty tried (L1LR cells only).
    #[serde(skip_serializing_if = "Vec::is_empty", default)]
    pub lambda_mean_auc: Vec<(f64, Option<f64>)>,
    pub per_fold_metrics: Vec<Option<MetricSet>>,
    pub fold_errors: Vec<Option<String>>,
    pub mean_auc: Option<f64>,
    pub mean_recall: Option<f64>,
    pub mean_precision: Option<f64>,
    pub mean_f1: Option<f64>,
    /// Folds with no metrics at all.
    pub skipped_folds: usize,
    /// Folds whose precision was undefined.
    pub precision_null_folds: usize,
    /// Per-fold weighted error of every boosting round.
    #[serde(skip_serializing_if = "Vec::is_empty", default)]
    pub boost_traces: Vec<Vec<f64>>,
    #[serde(skip_serializing_if = "Vec::is_empty", default)]
    pub warnings: Vec<String>,
    /// Out-of-fold scores indexed by dataset row; NaN where not scored.
    #[serde(skip)]
    pub oof_scores: Vec<f64>,
}

fn null_mean(values: impl Iterator<Item = Option<f64>>) -> Option<f64> {
    let (sum, count) = values.flatten().fold((0.0, 0usize), |(s, c), v| (s + v, c + 1));
    (count > 0).then(|| sum / count as f64)
}

impl GridCell {
    fn new(
        classifier: ClassifierKind,
        ensemble: Option<EnsembleKind>,
        method: Method,
        target_positive: f64,
        k: usize,
        n_rows: usize,
    ) -> Self {
        Self {
            label: model_label(classifier, ensemble, method, target_positive),
            classifier,
            ensemble,
            method,
            target_positive,
            lambda: None,
            lambda_mean_auc: Vec::new(),
            per_fold_metrics: vec![None; k],
            fold_errors: vec![None; k],
            mean_auc: None,
            mean_recall: None,
            mean_precision: None,
            mean_f1: None,
            skipped_folds: 0,
            precision_null_folds: 0,
            boost_traces: Vec::new(),
            warnings: Vec::new(),
            oof_scores: vec![f64::NAN; n_rows],
        }
    }

    /// Recomputes the null-skipping means from `per_fold_metrics`.
    pub fn recompute_means(&mut self) {
        let m = &self.per_fold_metrics;
        self.mean_auc = null_mean(m.iter().map(|x| x.as_ref().map(|x| x.auc)));
        self.mean_recall = null_mean(m.iter().map(|x| x.as_ref().and_then(|x| x.recall)));
        self.mean_precision = null_mean(m.iter().map(|x| x.as_ref().and_then(|x| x.precision)));
        self.mean_f1 = null_mean(m.iter().map(|x| x.as_ref().and_then(|x| x.f1)));
        self.skipped_folds = m.iter().filter(|x| x.is_none()).count();
        self.precision_null_folds = m.iter().flatten().filter(|x| x.precision.is_none()).count();
    }

    fn record(&mut self, fold: &FoldData, outcome: std::result::Result<(MetricSet, Vec<f64>), String>) {
        match outcome {
            Ok((metrics, scores)) => {
                for (&row, s) in fold.validation_indices.iter().zip(scores) {
                    self.oof_scores[row] = s;
                }
                self.per_fold_metrics[fold.fold] = Some(metrics);
            }
            Err(e) => self.fold_errors[fold.fold] = Some(e),
        }
    }

    fn fail_fold(&mut self, fold: usize, error: &str) {
        self.fold_errors[fold] = Some(error.to_string());
    }
}

/// What one resampled training set looked like.
#[derive(Debug, Clone)]
pub struct VariantAudit {
    pub method: Method,
    pub target_positive: f64,
    pub n_rows: usize,
    pub n_positive: usize,
    pub n_synthetic: usize,
    pub fingerprint: u64,
    /// Dataset row indices copied into the set (sorted, deduplicated).
    pub source_rows: Vec<usize>,
}

/// Per-fold record used to verify that validation rows never leak into
/// training.
#[derive(Debug, Clone)]
pub struct FoldAudit {
    pub fold: usize,
    pub training_indices: Vec<usize>,
    pub validation_indices: Vec<usize>,
    pub stats: Option<PreprocessStats>,
    pub validation_raw_fingerprint: Option<u64>,
    pub variants: Vec<VariantAudit>,
    pub error: Option<String>,
}

#[derive(Debug, Clone)]
pub struct GridOutput {
    pub cells: Vec<GridCell>,
    pub audits: Vec<FoldAudit>,
}

#[derive(Debug, Clone, Copy)]
enum Slot {
    Lr,
    L1lr(usize),
    Dt,
}

struct Job {
    fold: usize,
    variant: usize,
}

struct JobOutput {
    audit: Option<VariantAudit>,
    slots: Vec<(Slot, std::result::Result<(MetricSet, Vec<f64>), String>)>,
    error: Option<String>,
}

pub(super) fn train_base(
    kind: ClassifierKind,
    lambda: Option<f64>,
    train: &Dataset,
    params: &ExperimentParams,
) -> Result<TrainedClassifier> {
    Ok(match kind {
        ClassifierKind::Lr => TrainedClassifier::Linear(train_lr(train, &params.linear)?),
        ClassifierKind::L1lr => TrainedClassifier::Linear(train_l1lr(train, lambda.unwrap_or(0.0), &params.linear)?),
        ClassifierKind::Dt => TrainedClassifier::Tree(train_tree(train, None, &params.tree)?),
    })
}

fn score(model: &TrainedClassifier, validation: &Dataset, threshold: f64) -> Result<(MetricSet, Vec<f64>)> {
    let scores = model.score_all(validation)?;
    let metrics = MetricSet::compute(&scores, validation.labels(), threshold)?;
    Ok((metrics, scores))
}

pub(super) fn resample_fold(
    fold: &FoldData,
    method: Method,
    ratio: f64,
    params: &ExperimentParams,
) -> Result<(Dataset, VariantAudit)> {
    let spec = ResampleSpec {
        method,
        target_positive: ratio,
        smote_k: params.smote_k,
        kmeans_max_iter: params.kmeans_max_iter,
        kmeans_tol: params.kmeans_tol,
        seed: resample_seed(params.seed, fold.fold, method, ratio),
    };
    let out = resample_tracked(&fold.train, &spec)?;
    let mut source_rows: Vec<usize> = out.origin.iter().flatten().map(|&i| fold.training_indices[i]).collect();
    source_rows.sort_unstable();
    source_rows.dedup();
    let audit = VariantAudit {
        method,
        target_positive: ratio,
        n_rows: out.data.n_rows(),
        n_positive: out.data.n_positive(),
        n_synthetic: out.n_synthetic(),
        fingerprint: fingerprint(&out.data),
        source_rows,
    };
    Ok((out.data, audit))
}

fn slots_for(params: &ExperimentParams) -> Vec<(Slot, ClassifierKind, Option<f64>)> {
    let mut slots = Vec::new();
    for &c in &params.classifiers {
        match c {
            ClassifierKind::Lr => slots.push((Slot::Lr, c, None)),
            ClassifierKind::Dt => slots.push((Slot::Dt, c, None)),
            ClassifierKind::L1lr => {
                for (i, &l) in params.lambda_grid.iter().enumerate() {
                    slots.push((Slot::L1lr(i), c, Some(l)));
                }
            }
        }
    }
    slots
}

fn run_job(fold: &FoldData, method: Method, ratio: f64, params: &ExperimentParams) -> JobOutput {
    let (train, audit) = match resample_fold(fold, method, ratio, params) {
        Ok(v) => v,
        Err(e) => {
            return JobOutput {
                audit: None,
                slots: Vec::new(),
                error: Some(format!("resampling failed: {e}")),
            }
        }
    };
    let slots = slots_for(params)
        .into_iter()
        .map(|(slot, kind, lambda)| {
            let outcome = train_base(kind, lambda, &train, params)
                .and_then(|m| score(&m, &fold.validation, params.threshold))
                .map_err(|e| e.to_string());
            (slot, outcome)
        })
        .collect();
    JobOutput {
        audit: Some(audit),
        slots,
        error: None,
    }
}

/// Variants of the grid: the unresampled baseline first, then every
/// (method, ratio) pair.
fn variants(ds: &Dataset, params: &ExperimentParams) -> Result<Vec<(Method, f64)>> {
    let mut v = vec![(Method::None, positive_rate(ds)?)];
    for &m in &params.methods {
        for &r in &params.ratios {
            v.push((m, r));
        }
    }
    Ok(v)
}

fn prepare_all(ds: &Dataset, plan: &FoldPlan, params: &ExperimentParams) -> Vec<std::result::Result<FoldData, String>> {
    (0..plan.k)
        .into_par_iter()
        .map(|f| prepare_fold(ds, plan, f, params.missing_threshold).map_err(|e| format!("fold preparation failed: {e}")))
        .collect()
}

/// Runs every (classifier, method, ratio) cell plus one unresampled baseline
/// per classifier over the folds of `plan`.
///
/// Per fold, preprocessing is fitted on the training rows, the preprocessed
/// training rows are resampled and every classifier is scored on the
/// untouched validation rows. Failures are recorded per cell and fold.
pub fn run_grid(ds: &Dataset, plan: &FoldPlan, params: &ExperimentParams) -> Result<GridOutput> {
    params.validate()?;
    let variants = variants(ds, params)?;
    let folds = prepare_all(ds, plan, params);
    let jobs: Vec<Job> = (0..plan.k)
        .flat_map(|fold| (0..variants.len()).map(move |variant| Job { fold, variant }))
        .collect();
    let outputs: Vec<JobOutput> = jobs
        .par_iter()
        .map(|job| match &folds[job.fold] {
            Ok(fd) => {
                let (m, r) = variants[job.variant];
                run_job(fd, m, r, params)
            }
            Err(e) => JobOutput {
                audit: None,
                slots: Vec::new(),
                error: Some(e.clone()),
            },
        })
        .collect();

    let n = ds.n_rows();
    let k = plan.k;
    let mut audits: Vec<FoldAudit> = folds
        .iter()
        .enumerate()
        .map(|(f, fd)| match fd {
            Ok(fd) => FoldAudit {
                fold: f,
                training_indices: fd.training_indices.clone(),
                validation_indices: fd.validation_indices.clone(),
                stats: Some(fd.stats.clone()),
                validation_raw_fingerprint: Some(fd.validation_raw_fingerprint),
                variants: Vec::new(),
                error: None,
            },
            Err(e) => FoldAudit {
                fold: f,
                training_indices: plan.training_indices(f),
                validation_indices: plan.validation_indices(f),
                stats: None,
                validation_raw_fingerprint: None,
                variants: Vec::new(),
                error: Some(e.clone()),
            },
        })
        .collect();

    let mut cells = Vec::new();
    for &classifier in &params.classifiers {
        for (v, &(method, ratio)) in variants.iter().enumerate() {
            let mut cell = GridCell::new(classifier, None, method, ratio, k, n);
            let n_lambda = if classifier == ClassifierKind::L1lr {
                params.lambda_grid.len()
            } else {
                1
            };
            let mut per_lambda: Vec<GridCell> = (0..n_lambda).map(|_| cell.clone()).collect();
            for (job, out) in jobs.iter().zip(&outputs).filter(|(j, _)| j.variant == v) {
                let fd = match &folds[job.fold] {
                    Ok(fd) => fd,
                    Err(e) => {
                        per_lambda.iter_mut().for_each(|c| c.fail_fold(job.fold, e));
                        continue;
                    }
                };
                if let Some(e) = &out.error {
                    per_lambda.iter_mut().for_each(|c| c.fail_fold(job.fold, e));
                    continue;
                }
                for (slot, outcome) in &out.slots {
                    let target = match (classifier, *slot) {
                        (ClassifierKind::Lr, Slot::Lr) | (ClassifierKind::Dt, Slot::Dt) => 0,
                        (ClassifierKind::L1lr, Slot::L1lr(i)) => i,
                        _ => continue,
                    };
                    per_lambda[target].record(fd, outcome.clone());
                }
            }
            per_lambda.iter_mut().for_each(GridCell::recompute_means);
            if classifier == ClassifierKind::L1lr {
                let mut best = 0;
                for i in 1..n_lambda {
                    if per_lambda[i].mean_auc.unwrap_or(f64::NEG_INFINITY)
                        > per_lambda[best].mean_auc.unwrap_or(f64::NEG_INFINITY)
                    {
                        best = i;
                    }
                }
                let trace = params
                    .lambda_grid
                    .iter()
                    .zip(&per_lambda)
                    .map(|(&l, c)| (l, c.mean_auc))
                    .collect();
                cell = per_lambda.swap_remove(best);
                cell.lambda = Some(params.lambda_grid[best]);
                cell.lambda_mean_auc = trace;
            } else {
                cell = per_lambda.swap_remove(0);
            }
            cells.push(cell);
        }
    }

    for (job, out) in jobs.iter().zip(outputs) {
        if let Some(a) = out.audit {
            audits[job.fold].variants.push(a);
        }
    }
    Ok(GridOutput { cells, audits })
}

/// Cross-validated bagging and boosting on DT at the given (method, ratio),
/// over the same folds and with the same resampled training sets as the grid.
pub fn run_ensemble_stage(
    ds: &Dataset,
    plan: &FoldPlan,
    dt_best: (Method, f64),
    params: &ExperimentParams,
) -> Result<Vec<GridCell>> {
    params.validate()?;
    let (method, ratio) = dt_best;
    let folds = prepare_all(ds, plan, params);
    type Scored = std::result::Result<(MetricSet, Vec<f64>), String>;
    type FoldResult = std::result::Result<([(Scored, Vec<f64>); 2], Vec<String>), String>;
    let per_fold: Vec<FoldResult> = folds
        .par_iter()
        .map(|fd| {
            let fd = fd.as_ref().map_err(Clone::clone)?;
            let (train, _) = resample_fold(fd, method, ratio, params).map_err(|e| format!("resampling failed: {e}"))?;
            let bag_seed = model_seed(params.seed, fd.fold, method, ratio, TAG_BAGGING);
            let bagging = bagging_train(&train, params.bagging.n_estimators, &params.bagging.tree, bag_seed)
                .map(TrainedClassifier::Ensemble)
                .and_then(|m| score(&m, &fd.validation, params.threshold))
                .map_err(|e| e.to_string());
            let boost_seed = model_seed(params.seed, fd.fold, method, ratio, TAG_BOOSTING);
            let (boosting, trace, warnings) =
                match boosting_train(&train, params.boosting.n_estimators, &params.boosting.tree, boost_seed) {
                    Ok(e) => {
                        let trace = e.rounds.iter().map(|r| r.error).collect();
                        let warnings = e.warnings.iter().map(|w| format!("fold {}: {w}", fd.fold)).collect();
                        let m = TrainedClassifier::Ensemble(e);
                        (score(&m, &fd.validation, params.threshold).map_err(|e| e.to_string()), trace, warnings)
                    }
                    Err(e) => (Err(e.to_string()), Vec::new(), Vec::new()),
                };
            Ok(([(bagging, Vec::new()), (boosting, trace)], warnings))
        })
        .collect();

    let mut cells = [EnsembleKind::Bagging, EnsembleKind::Boosting]
        .map(|kind| GridCell::new(ClassifierKind::Dt, Some(kind), method, ratio, plan.k, ds.n_rows()));
    cells[1].boost_traces = vec![Vec::new(); plan.k];
    for (f, result) in per_fold.into_iter().enumerate() {
        match result {
            Ok((pair, warnings)) => {
                let fd = folds[f].as_ref().expect("successful fold was prepared");
                for (cell, (outcome, trace)) in cells.iter_mut().zip(pair) {
                    cell.record(fd, outcome);
                    if cell.ensemble == Some(EnsembleKind::Boosting) {
                        cell.boost_traces[f] = trace;
                        cell.warnings.extend(warnings.iter().cloned());
                    }
                }
            }
            Err(e) => cells.iter_mut().for_each(|c| c.fail_fold(f, &e)),
        }
    }
    cells.iter_mut().for_each(GridCell::recompute_means);
    Ok(cells.into())
}
