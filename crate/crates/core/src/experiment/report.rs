use std::cmp::Ordering;
use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::folds::{stratified_kfold, FoldPlan};
use super::grid::{
    run_ensemble_stage, run_grid, train_base, FoldAudit, GridCell, GridOutput, TAG_BAGGING, TAG_BOOSTING,
};
use super::{ClassifierKind, ExperimentParams};
use crate::data::{apply_preprocess, fit_preprocess, positive_rate, Dataset};
use crate::ensemble::{bagging_train, boosting_train, EnsembleKind};
use crate::error::{Error, Result};
use crate::evaluate::{pca2, roc_points};
use crate::model::{ImportanceKind, ModelFile, TrainedClassifier};
use crate::resample::{resample, Method, ResampleSpec};
use crate::rng::{derive_seed, ratio_tag};

pub const REPORT_FORMAT: &str = "imbrisk-report";
pub const REPORT_VERSION: u32 = 1;

const TAG_FOLDS: u64 = 100;
const TAG_FINAL: u64 = 101;
const TAG_PCA: u64 = 102;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DataSummary {
    pub n_rows: usize,
    pub n_features: usize,
    pub n_positive: usize,
    pub positive_rate: f64,
    pub feature_names: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FoldSummary {
    pub k: usize,
    pub seed: u64,
    pub sizes: Vec<usize>,
    pub positives: Vec<usize>,
}

/// Cross-validated summary of one selected configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BestChoice {
    pub label: String,
    pub classifier: ClassifierKind,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub ensemble: Option<EnsembleKind>,
    pub method: Method,
    pub target_positive: f64,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub lambda: Option<f64>,
    pub mean_auc: Option<f64>,
    pub mean_recall: Option<f64>,
    pub mean_precision: Option<f64>,
    pub mean_f1: Option<f64>,
}

impl From<&GridCell> for BestChoice {
    fn from(c: &GridCell) -> Self {
        Self {
            label: c.label.clone(),
            classifier: c.classifier,
            ensemble: c.ensemble,
            method: c.method,
            target_positive: c.target_positive,
            lambda: c.lambda,
            mean_auc: c.mean_auc,
            mean_recall: c.mean_recall,
            mean_precision: c.mean_precision,
            mean_f1: c.mean_f1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OptimalModel {
    #[serde(flatten)]
    pub choice: BestChoice,
    /// Why this candidate won.
    pub rule: String,
    pub candidates: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ImportanceEntry {
    pub feature: String,
    pub score: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ImportanceRanking {
    pub kind: ImportanceKind,
    pub model_label: String,
    pub entries: Vec<ImportanceEntry>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LeakAudit {
    pub folds_checked: usize,
    pub training_sets_checked: usize,
    /// Validation rows found among the sources of any training set.
    pub validation_rows_in_training: usize,
    pub synthetic_rows: usize,
}

/// Everything a run produced that is worth keeping, in one serializable object.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub format: String,
    pub version: u32,
    pub data: DataSummary,
    pub params: ExperimentParams,
    pub folds: FoldSummary,
    pub grid: Vec<GridCell>,
    pub best_per_classifier: BTreeMap<ClassifierKind, BestChoice>,
    pub ensemble_results: Vec<GridCell>,
    pub optimal_model: OptimalModel,
    pub importance_ranking: ImportanceRanking,
    pub leak_audit: LeakAudit,
    pub warnings: Vec<String>,
}

impl ExperimentReport {
    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string_pretty(self).map_err(|e| Error::Model(e.to_string()))
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let report: ExperimentReport = serde_json::from_str(text).map_err(|e| Error::Model(e.to_string()))?;
        if report.format != REPORT_FORMAT {
            return Err(Error::Model(format!("unexpected format tag `{}`", report.format)));
        }
        Ok(report)
    }
}

fn desc(a: Option<f64>, b: Option<f64>) -> Ordering {
    let a = a.unwrap_or(f64::NEG_INFINITY);
    let b = b.unwrap_or(f64::NEG_INFINITY);
    b.total_cmp(&a)
}

/// Ranking order: higher AUC, then higher recall, then higher F1, then lower
/// ratio. `Less` means `a` ranks ahead of `b`.
pub fn rank_order(a: &GridCell, b: &GridCell) -> Ordering {
    desc(a.mean_auc, b.mean_auc)
        .then_with(|| desc(a.mean_recall, b.mean_recall))
        .then_with(|| desc(a.mean_f1, b.mean_f1))
        .then_with(|| a.target_positive.total_cmp(&b.target_positive))
}

fn best_of<'a>(cells: impl Iterator<Item = &'a GridCell>) -> Option<&'a GridCell> {
    // First of equals wins, so the grid order settles exact ties.
    cells
        .filter(|c| c.mean_auc.is_some())
        .fold(None, |best: Option<&GridCell>, c| match best {
            Some(b) if rank_order(c, b) != Ordering::Less => Some(b),
            _ => Some(c),
        })
}

/// Best cell per classifier among the non-ensemble cells, baselines included.
pub fn select_best(cells: &[GridCell]) -> Result<BTreeMap<ClassifierKind, GridCell>> {
    if cells.is_empty() {
        return Err(Error::Data("cannot select from an empty grid".into()));
    }
    let mut kinds: Vec<ClassifierKind> = cells.iter().filter(|c| c.ensemble.is_none()).map(|c| c.classifier).collect();
    kinds.sort();
    kinds.dedup();
    let mut out = BTreeMap::new();
    for kind in kinds {
        let best = best_of(cells.iter().filter(|c| c.ensemble.is_none() && c.classifier == kind)).ok_or_else(|| {
            Error::Data(format!("every {kind} cell failed in every fold; nothing to select"))
        })?;
        out.insert(kind, best.clone());
    }
    Ok(out)
}

/// Picks the optimal candidate. Boosting takes the lead from a better-AUC
/// leader when it trails by at most `tie_tolerance` and has higher recall.
fn choose_optimal<'a>(candidates: &[&'a GridCell], tie_tolerance: f64) -> Option<(&'a GridCell, String)> {
    let leader = best_of(candidates.iter().copied())?;
    let boosting = candidates
        .iter()
        .copied()
        .find(|c| c.ensemble == Some(EnsembleKind::Boosting) && c.mean_auc.is_some());
    if let Some(b) = boosting {
        if !std::ptr::eq(b, leader) {
            let (la, ba) = (leader.mean_auc.unwrap_or(0.0), b.mean_auc.unwrap_or(0.0));
            let lr = leader.mean_recall.unwrap_or(f64::NEG_INFINITY);
            if ba >= la - tie_tolerance && b.mean_recall.unwrap_or(f64::NEG_INFINITY) > lr {
                return Some((
                    b,
                    format!(
                        "boosting within {tie_tolerance} AUC of {} with higher mean recall",
                        leader.label
                    ),
                ));
            }
        }
    }
    Some((leader, "highest mean AUC (ties: recall, F1, lower ratio)".to_string()))
}

fn prepare_full(ds: &Dataset, params: &ExperimentParams) -> Result<(Dataset, crate::data::PreprocessStats)> {
    let stats = fit_preprocess(ds, params.missing_threshold)?;
    Ok((apply_preprocess(ds, &stats)?, stats))
}

fn spec(method: Method, ratio: f64, seed: u64, params: &ExperimentParams) -> ResampleSpec {
    ResampleSpec {
        method,
        target_positive: ratio,
        smote_k: params.smote_k,
        kmeans_max_iter: params.kmeans_max_iter,
        kmeans_tol: params.kmeans_tol,
        seed,
    }
}

/// Refits `choice` on the whole dataset: preprocessing fitted on every row,
/// then the chosen resampling, then the chosen model.
pub fn refit(ds: &Dataset, choice: &BestChoice, params: &ExperimentParams) -> Result<ModelFile> {
    let (prepared, stats) = prepare_full(ds, params)?;
    let train = match choice.method {
        Method::None => prepared,
        m => {
            let seed = derive_seed(params.seed, &[TAG_FINAL, m.tag(), ratio_tag(choice.target_positive)]);
            resample(&prepared, &spec(m, choice.target_positive, seed, params))?
        }
    };
    let model_seed = |tag| derive_seed(params.seed, &[TAG_FINAL, tag]);
    let model = match choice.ensemble {
        None => train_base(choice.classifier, choice.lambda, &train, params)?,
        Some(EnsembleKind::Bagging) => TrainedClassifier::Ensemble(bagging_train(
            &train,
            params.bagging.n_estimators,
            &params.bagging.tree,
            model_seed(TAG_BAGGING),
        )?),
        Some(EnsembleKind::Boosting) => TrainedClassifier::Ensemble(boosting_train(
            &train,
            params.boosting.n_estimators,
            &params.boosting.tree,
            model_seed(TAG_BOOSTING),
        )?),
    };
    Ok(ModelFile::new(choice.label.clone(), stats.kept_names.clone(), Some(stats), model))
}

/// Importance of a fitted model, sorted non-increasing (name order on ties).
pub fn importance_ranking(model: &ModelFile) -> ImportanceRanking {
    let (kind, scores) = model.model.importance();
    let mut entries: Vec<ImportanceEntry> = model
        .feature_names
        .iter()
        .zip(scores)
        .map(|(f, s)| ImportanceEntry {
            feature: f.clone(),
            score: s,
        })
        .collect();
    entries.sort_by(|a, b| b.score.total_cmp(&a.score).then_with(|| a.feature.cmp(&b.feature)));
    ImportanceRanking {
        kind,
        model_label: model.label.clone(),
        entries,
    }
}

fn leak_audit(audits: &[FoldAudit]) -> LeakAudit {
    let mut out = LeakAudit {
        folds_checked: 0,
        training_sets_checked: 0,
        validation_rows_in_training: 0,
        synthetic_rows: 0,
    };
    for a in audits.iter().filter(|a| a.error.is_none()) {
        out.folds_checked += 1;
        let mut is_validation = vec![false; a.training_indices.len() + a.validation_indices.len()];
        for &i in &a.validation_indices {
            is_validation[i] = true;
        }
        for v in &a.variants {
            out.training_sets_checked += 1;
            out.synthetic_rows += v.n_synthetic;
            out.validation_rows_in_training += v.source_rows.iter().filter(|&&i| is_validation[i]).count();
        }
    }
    out
}

/// Assembles the report from the grid and ensemble stages and refits the
/// optimal model on the full data.
pub fn finalize(
    ds: &Dataset,
    plan: &FoldPlan,
    params: &ExperimentParams,
    grid: &GridOutput,
    ensemble_cells: &[GridCell],
) -> Result<(ExperimentReport, ModelFile)> {
    let best = select_best(&grid.cells)?;
    let mut candidates: Vec<&GridCell> = best.values().collect();
    candidates.extend(ensemble_cells.iter());
    let (winner, rule) = choose_optimal(&candidates, params.tie_tolerance)
        .ok_or_else(|| Error::Data("no candidate model produced metrics".into()))?;
    let choice = BestChoice::from(winner);
    let model = refit(ds, &choice, params)?;

    let mut warnings = Vec::new();
    for c in grid.cells.iter().chain(ensemble_cells) {
        if c.skipped_folds > 0 {
            warnings.push(format!("{}: {} of {} folds produced no metrics", c.label, c.skipped_folds, plan.k));
        }
        warnings.extend(c.warnings.iter().map(|w| format!("{}: {w}", c.label)));
    }
    if let TrainedClassifier::Ensemble(e) = &model.model {
        warnings.extend(e.warnings.iter().map(|w| format!("final {}: {w}", model.label)));
    }

    let positives = (0..plan.k)
        .map(|f| plan.validation_indices(f).iter().filter(|&&i| ds.label(i) == 1).count())
        .collect();
    let report = ExperimentReport {
        format: REPORT_FORMAT.to_string(),
        version: REPORT_VERSION,
        data: DataSummary {
            n_rows: ds.n_rows(),
            n_features: ds.n_features(),
            n_positive: ds.n_positive(),
            positive_rate: positive_rate(ds)?,
            feature_names: ds.feature_names().to_vec(),
        },
        params: params.clone(),
        folds: FoldSummary {
            k: plan.k,
            seed: plan.seed,
            sizes: plan.fold_sizes(),
            positives,
        },
        grid: grid.cells.clone(),
        best_per_classifier: best.iter().map(|(k, c)| (*k, BestChoice::from(c))).collect(),
        ensemble_results: ensemble_cells.to_vec(),
        optimal_model: OptimalModel {
            choice,
            rule,
            candidates: candidates.iter().map(|c| c.label.clone()).collect(),
        },
        importance_ranking: importance_ranking(&model),
        leak_audit: leak_audit(&grid.audits),
        warnings,
    };
    Ok((report, model))
}

/// Pooled out-of-fold ROC of a cell over every row it scored.
pub fn oof_roc(cell: &GridCell, ds: &Dataset) -> Result<Vec<(f64, f64)>> {
    let (scores, labels): (Vec<f64>, Vec<u8>) = cell
        .oof_scores
        .iter()
        .zip(ds.labels())
        .filter(|(s, _)| s.is_finite())
        .map(|(&s, &l)| (s, l))
        .unzip();
    roc_points(&scores, &labels)
}

/// Two-component PCA of one resampled view of the data.
#[derive(Debug, Clone)]
pub struct PcaVariant {
    pub method: Method,
    pub target_positive: f64,
    pub projections: Vec<[f64; 2]>,
    pub labels: Vec<u8>,
    pub warnings: Vec<String>,
}

/// The fully preprocessed data as is and resampled by each method at
/// `params.pca_ratio`, each projected on its own top two components.
pub fn pca_variants(ds: &Dataset, params: &ExperimentParams) -> Result<Vec<PcaVariant>> {
    let (prepared, _) = prepare_full(ds, params)?;
    let mut out = Vec::new();
    let base_rate = positive_rate(&prepared)?;
    let mut views = vec![(Method::None, base_rate, prepared.clone())];
    for &m in &params.methods {
        let seed = derive_seed(params.seed, &[TAG_PCA, m.tag()]);
        views.push((m, params.pca_ratio, resample(&prepared, &spec(m, params.pca_ratio, seed, params))?));
    }
    for (method, ratio, view) in views {
        let p = pca2(&view)?;
        out.push(PcaVariant {
            method,
            target_positive: ratio,
            projections: p.projections,
            labels: view.labels().to_vec(),
            warnings: p.warnings,
        });
    }
    Ok(out)
}

#[derive(Debug, Clone)]
pub struct ExperimentOutcome {
    pub report: ExperimentReport,
    pub grid: GridOutput,
    pub ensemble_cells: Vec<GridCell>,
    pub model: ModelFile,
    pub plan: FoldPlan,
}

/// Fold split, grid, per-classifier selection, ensemble stage on the best DT
/// configuration, optimal-model selection and refit.
pub fn run_experiment(ds: &Dataset, params: &ExperimentParams) -> Result<ExperimentOutcome> {
    params.validate()?;
    ds.require_both_classes("experiment")?;
    let plan = stratified_kfold(ds, params.folds, derive_seed(params.seed, &[TAG_FOLDS]))?;
    log::info!("running grid over {} folds", plan.k);
    let grid = run_grid(ds, &plan, params)?;
    let best = select_best(&grid.cells)?;
    let ensemble_cells = match best.get(&ClassifierKind::Dt) {
        Some(dt) => {
            log::info!("ensemble stage at {}", dt.label);
            run_ensemble_stage(ds, &plan, (dt.method, dt.target_positive), params)?
        }
        None => {
            log::warn!("DT not in the grid; skipping the ensemble stage");
            Vec::new()
        }
    };
    let (report, model) = finalize(ds, &plan, params, &grid, &ensemble_cells)?;
    Ok(ExperimentOutcome {
        report,
        grid,
        ensemble_cells,
        model,
        plan,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::generate_synthetic;
    use crate::evaluate::MetricSet;

    fn cell(kind: ClassifierKind, ens: Option<EnsembleKind>, ratio: f64, auc: f64, recall: f64) -> GridCell {
        let mut c = GridCell {
            label: super::super::model_label(kind, ens, Method::Smote, ratio),
            classifier: kind,
            ensemble: ens,
            method: Method::Smote,
            target_positive: ratio,
            lambda: None,
            lambda_mean_auc: Vec::new(),
            per_fold_metrics: Vec::new(),
            fold_errors: Vec::new(),
            mean_auc: Some(auc),
            mean_recall: Some(recall),
            mean_precision: None,
            mean_f1: Some(0.5),
            skipped_folds: 0,
            precision_null_folds: 0,
            boost_traces: Vec::new(),
            warnings: Vec::new(),
            oof_scores: Vec::new(),
        };
        c.per_fold_metrics.clear();
        c
    }

    #[test]
    fn tie_breaks_on_recall_then_ratio() {
        let cells = vec![
            cell(ClassifierKind::Dt, None, 0.5, 0.8, 0.8),
            cell(ClassifierKind::Dt, None, 0.6, 0.8, 0.9),
            cell(ClassifierKind::Lr, None, 0.4, 0.7, 0.5),
            cell(ClassifierKind::Lr, None, 0.2, 0.7, 0.5),
        ];
        let best = select_best(&cells).unwrap();
        assert_eq!(best[&ClassifierKind::Dt].target_positive, 0.6);
        assert_eq!(best[&ClassifierKind::Lr].target_positive, 0.2);
    }

    #[test]
    fn all_null_classifier_is_an_error() {
        let mut c = cell(ClassifierKind::Dt, None, 0.5, 0.8, 0.8);
        c.mean_auc = None;
        assert!(select_best(&[c]).is_err());
    }

    #[test]
    fn boosting_wins_near_ties_on_recall() {
        let dt = cell(ClassifierKind::Dt, None, 0.5, 0.800, 0.70);
        let boost = cell(ClassifierKind::Dt, Some(EnsembleKind::Boosting), 0.5, 0.797, 0.75);
        let (w, _) = choose_optimal(&[&dt, &boost], 0.005).unwrap();
        assert_eq!(w.ensemble, Some(EnsembleKind::Boosting));
        let far = cell(ClassifierKind::Dt, Some(EnsembleKind::Boosting), 0.5, 0.79, 0.99);
        let (w, _) = choose_optimal(&[&dt, &far], 0.005).unwrap();
        assert_eq!(w.ensemble, None);
        let (w, _) = choose_optimal(&[&dt, &boost], 0.0).unwrap();
        assert_eq!(w.ensemble, None);
    }

    #[test]
    fn means_recompute() {
        let ds = generate_synthetic(300, 3, 0.15, 2.0, 4).unwrap();
        let mut p = ExperimentParams::new(3);
        p.folds = 3;
        p.ratios = vec![0.3];
        p.methods = vec![Method::Rus];
        p.classifiers = vec![ClassifierKind::Dt];
        let plan = stratified_kfold(&ds, 3, 1).unwrap();
        let out = run_grid(&ds, &plan, &p).unwrap();
        assert_eq!(out.cells.len(), 2);
        for c in &out.cells {
            let mut r = c.clone();
            r.recompute_means();
            assert_eq!(&r, c);
            assert_eq!(c.per_fold_metrics.len(), 3);
            let aucs: Vec<f64> = c.per_fold_metrics.iter().flatten().map(|m: &MetricSet| m.auc).collect();
            let mean = aucs.iter().sum::<f64>() / aucs.len() as f64;
            assert!((c.mean_auc.unwrap() - mean).abs() < 1e-12);
        }
    }

    #[test]
    fn small_experiment_end_to_end() {
        let ds = generate_synthetic(400, 4, 0.1, 2.0, 8).unwrap();
        let mut p = ExperimentParams::new(11);
        p.folds = 3;
        p.ratios = vec![0.3, 0.5];
        p.methods = vec![Method::Rus, Method::Smote];
        p.bagging.n_estimators = 5;
        p.boosting.n_estimators = 5;
        p.lambda_grid = vec![0.01];
        let out = run_experiment(&ds, &p).unwrap();
        let r = &out.report;
        assert_eq!(r.grid.len(), 3 * (1 + 4));
        assert_eq!(r.ensemble_results.len(), 2);
        assert_eq!(r.leak_audit.validation_rows_in_training, 0);
        let dt = &r.best_per_classifier[&ClassifierKind::Dt];
        for e in &r.ensemble_results {
            assert_eq!((e.method, e.target_positive), (dt.method, dt.target_positive));
        }
        let s: f64 = r.importance_ranking.entries.iter().map(|e| e.score).sum();
        assert!(s == 0.0 || (s - 1.0).abs() < 1e-9);
        assert!(r
            .importance_ranking
            .entries
            .windows(2)
            .all(|w| w[0].score >= w[1].score));
        let again = run_experiment(&ds, &p).unwrap();
        assert_eq!(r.to_json().unwrap(), again.report.to_json().unwrap());
        let back = ExperimentReport::from_json(&r.to_json().unwrap()).unwrap();
        assert_eq!(back.optimal_model, r.optimal_model);
    }

    #[test]
    fn pca_views_hit_ratio() {
        let ds = generate_synthetic(200, 4, 0.1, 2.0, 8).unwrap();
        let p = ExperimentParams::new(2);
        let views = pca_variants(&ds, &p).unwrap();
        assert_eq!(views.len(), 5);
        for v in &views[1..] {
            let pos = v.labels.iter().filter(|&&l| l == 1).count() as f64 / v.labels.len() as f64;
            assert!((pos - 0.5).abs() <= 1.0 / v.labels.len() as f64 + 1e-12);
            assert_eq!(v.projections.len(), v.labels.len());
        }
    }
}
