//! Layout of an experiment run directory:
//!
//! ```text
//! <out>/report.json          full report
//! <out>/grid.csv             one row per grid or ensemble cell
//! <out>/roc/<label>.csv      pooled out-of-fold ROC of each selected model
//! <out>/importance.csv       importance ranking of the optimal model
//! <out>/pca/<view>.csv       2-D PCA of the data and each resampled view
//! <out>/optimal_model.json   optimal model refitted on all rows
//! <out>/scores.csv           that model's score for every input row
//! <out>/INCOMPLETE           present only while running or after a failure
//! ```
//!
//! File names replace `%` in labels with `pct`.

use std::fs;
use std::path::Path;

use imbrisk::evaluate::{write_pca_csv, write_roc_csv};
use imbrisk::experiment::{oof_roc, percent_label, ExperimentOutcome, GridCell, ImportanceRanking, PcaVariant};
use imbrisk::resample::Method;
use imbrisk::Dataset;

use crate::CliError;

pub const INCOMPLETE: &str = "INCOMPLETE";

pub fn file_stem(label: &str) -> String {
    label.replace('%', "pct")
}

fn csv_writer(path: &Path) -> Result<csv::Writer<fs::File>, CliError> {
    csv::Writer::from_path(path).map_err(|source| csv_error(path, source))
}

fn csv_error(path: &Path, source: csv::Error) -> CliError {
    CliError::Core(imbrisk::Error::Csv {
        path: path.to_path_buf(),
        source,
    })
}

fn opt(v: Option<f64>) -> String {
    v.map_or_else(String::new, |x| x.to_string())
}

pub fn write_grid_csv(path: &Path, cells: &[GridCell]) -> Result<(), CliError> {
    let mut w = csv_writer(path)?;
    let wrap = |r: csv::Result<()>| r.map_err(|e| csv_error(path, e));
    wrap(w.write_record([
        "label",
        "classifier",
        "ensemble",
        "method",
        "target_positive",
        "lambda",
        "mean_auc",
        "mean_recall",
        "mean_precision",
        "mean_f1",
        "skipped_folds",
        "precision_null_folds",
    ]))?;
    for c in cells {
        wrap(w.write_record([
            c.label.clone(),
            c.classifier.to_string(),
            c.ensemble.map_or_else(String::new, |e| e.as_str().to_string()),
            c.method.as_str().to_string(),
            c.target_positive.to_string(),
            opt(c.lambda),
            opt(c.mean_auc),
            opt(c.mean_recall),
            opt(c.mean_precision),
            opt(c.mean_f1),
            c.skipped_folds.to_string(),
            c.precision_null_folds.to_string(),
        ]))?;
    }
    w.flush().map_err(|e| CliError::io(path, e))
}

pub fn write_importance_csv(path: &Path, ranking: &ImportanceRanking) -> Result<(), CliError> {
    let mut w = csv_writer(path)?;
    let wrap = |r: csv::Result<()>| r.map_err(|e| csv_error(path, e));
    let kind = serde_json::to_value(ranking.kind)
        .ok()
        .and_then(|v| v.as_str().map(str::to_string))
        .unwrap_or_default();
    wrap(w.write_record(["rank", "feature", "score", "kind"]))?;
    for (i, e) in ranking.entries.iter().enumerate() {
        wrap(w.write_record([(i + 1).to_string(), e.feature.clone(), e.score.to_string(), kind.clone()]))?;
    }
    w.flush().map_err(|e| CliError::io(path, e))
}

pub fn write_scores_csv(path: &Path, labels: &[u8], scores: &[f64]) -> Result<(), CliError> {
    let mut w = csv_writer(path)?;
    let wrap = |r: csv::Result<()>| r.map_err(|e| csv_error(path, e));
    wrap(w.write_record(["row", "label", "score"]))?;
    for (i, (l, s)) in labels.iter().zip(scores).enumerate() {
        wrap(w.write_record([(i + 1).to_string(), l.to_string(), s.to_string()]))?;
    }
    w.flush().map_err(|e| CliError::io(path, e))
}

fn pca_stem(v: &PcaVariant) -> String {
    let method = match v.method {
        Method::None => "original",
        m => m.as_str(),
    };
    file_stem(&format!("{method}_{}", percent_label(v.target_positive)))
}

fn mkdir(path: &Path) -> Result<(), CliError> {
    fs::create_dir_all(path).map_err(|e| CliError::io(path, e))
}

/// Writes every file of a finished run except the marker handling.
pub fn write_run(dir: &Path, ds: &Dataset, outcome: &ExperimentOutcome, pca: &[PcaVariant]) -> Result<(), CliError> {
    let report = &outcome.report;
    let mut json = report.to_json()?;
    json.push('\n');
    let path = dir.join("report.json");
    fs::write(&path, json).map_err(|e| CliError::io(path, e))?;

    let mut cells = report.grid.clone();
    cells.extend(report.ensemble_results.iter().cloned());
    write_grid_csv(&dir.join("grid.csv"), &cells)?;

    let roc_dir = dir.join("roc");
    mkdir(&roc_dir)?;
    let selected: Vec<&String> = report
        .best_per_classifier
        .values()
        .map(|b| &b.label)
        .chain(report.ensemble_results.iter().map(|c| &c.label))
        .collect();
    for cell in outcome.grid.cells.iter().chain(&outcome.ensemble_cells) {
        if selected.contains(&&cell.label) && cell.oof_scores.iter().any(|s| s.is_finite()) {
            let points = oof_roc(cell, ds)?;
            write_roc_csv(roc_dir.join(format!("{}.csv", file_stem(&cell.label))), &points)?;
        }
    }

    write_importance_csv(&dir.join("importance.csv"), &report.importance_ranking)?;

    let pca_dir = dir.join("pca");
    mkdir(&pca_dir)?;
    for v in pca {
        write_pca_csv(pca_dir.join(format!("{}.csv", pca_stem(v))), &v.projections, &v.labels)?;
    }

    outcome.model.save(dir.join("optimal_model.json"))?;
    let scores = outcome.model.score_dataset(ds)?;
    write_scores_csv(&dir.join("scores.csv"), ds.labels(), &scores)?;
    Ok(())
}

pub fn mark_incomplete(dir: &Path, message: &str) -> Result<(), CliError> {
    let path = dir.join(INCOMPLETE);
    fs::write(&path, format!("{message}\n")).map_err(|e| CliError::io(path, e))
}

pub fn clear_incomplete(dir: &Path) -> Result<(), CliError> {
    let path = dir.join(INCOMPLETE);
    match fs::remove_file(&path) {
        Ok(()) => Ok(()),
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => Ok(()),
        Err(e) => Err(CliError::io(path, e)),
    }
}
