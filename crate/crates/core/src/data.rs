//! Datasets, CSV ingestion, synthetic data and train-fitted preprocessing.
//!
//! Missing cells are stored as `NaN` until [`apply_preprocess`] imputes them.

use std::collections::HashSet;
use std::path::Path;

use rand::seq::SliceRandom;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::rng_from_seed;

/// Real-valued feature matrix (row-major) with binary labels.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    features: Vec<f64>,
    labels: Vec<u8>,
    feature_names: Vec<String>,
}

impl Dataset {
    pub fn new(features: Vec<f64>, labels: Vec<u8>, feature_names: Vec<String>) -> Result<Self> {
        let d = feature_names.len();
        if d == 0 {
            return Err(Error::EmptyFeatures("construction"));
        }
        if features.len() != labels.len() * d {
            return Err(Error::Data(format!(
                "feature matrix has {} cells, expected {} rows x {} columns",
                features.len(),
                labels.len(),
                d
            )));
        }
        if let Some(bad) = labels.iter().find(|&&y| y > 1) {
            return Err(Error::Data(format!("label {bad} is not 0 or 1")));
        }
        let mut seen = HashSet::with_capacity(d);
        for name in &feature_names {
            if !seen.insert(name.as_str()) {
                return Err(Error::Data(format!("duplicate feature name `{name}`")));
            }
        }
        Ok(Self {
            features,
            labels,
            feature_names,
        })
    }

    /// Builds a dataset from row vectors with generated names `x1..xd`.
    pub fn from_rows(rows: &[Vec<f64>], labels: &[u8]) -> Result<Self> {
        let d = rows.first().map_or(0, Vec::len);
        if rows.len() != labels.len() {
            return Err(Error::Data("row count differs from label count".into()));
        }
        if rows.iter().any(|r| r.len() != d) {
            return Err(Error::Data("ragged rows".into()));
        }
        let names = (1..=d).map(|j| format!("x{j}")).collect();
        Self::new(rows.concat(), labels.to_vec(), names)
    }

    pub fn n_rows(&self) -> usize {
        self.labels.len()
    }

    pub fn n_features(&self) -> usize {
        self.feature_names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn row(&self, i: usize) -> &[f64] {
        let d = self.n_features();
        &self.features[i * d..(i + 1) * d]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        self.features.chunks_exact(self.n_features())
    }

    pub fn value(&self, row: usize, col: usize) -> f64 {
        self.features[row * self.n_features() + col]
    }

    pub fn column(&self, col: usize) -> impl Iterator<Item = f64> + '_ {
        self.rows().map(move |r| r[col])
    }

    pub fn label(&self, i: usize) -> u8 {
        self.labels[i]
    }

    pub fn labels(&self) -> &[u8] {
        &self.labels
    }

    pub fn features(&self) -> &[f64] {
        &self.features
    }

    pub fn feature_names(&self) -> &[String] {
        &self.feature_names
    }

    pub fn n_positive(&self) -> usize {
        self.labels.iter().filter(|&&y| y == 1).count()
    }

    pub fn n_negative(&self) -> usize {
        self.n_rows() - self.n_positive()
    }

    pub fn has_missing(&self) -> bool {
        self.features.iter().any(|v| v.is_nan())
    }

    /// Fails unless both classes are present.
    pub fn require_both_classes(&self, context: &'static str) -> Result<()> {
        let pos = self.n_positive();
        if pos == 0 || pos == self.n_rows() {
            return Err(Error::SingleClass(context));
        }
        Ok(())
    }

    /// New dataset made of the given rows, in the given order (repeats allowed).
    pub fn select_rows(&self, indices: &[usize]) -> Dataset {
        let d = self.n_features();
        let mut features = Vec::with_capacity(indices.len() * d);
        let mut labels = Vec::with_capacity(indices.len());
        for &i in indices {
            features.extend_from_slice(self.row(i));
            labels.push(self.labels[i]);
        }
        Dataset {
            features,
            labels,
            feature_names: self.feature_names.clone(),
        }
    }

    /// Appends rows to a copy of this dataset.
    pub(crate) fn with_extra_rows(&self, rows: &[f64], labels: &[u8]) -> Dataset {
        debug_assert_eq!(rows.len(), labels.len() * self.n_features());
        let mut out = self.clone();
        out.features.extend_from_slice(rows);
        out.labels.extend_from_slice(labels);
        out
    }

    pub fn column_index(&self, name: &str) -> Option<usize> {
        self.feature_names.iter().position(|n| n == name)
    }
}

/// Fraction of rows labeled 1.
pub fn positive_rate(ds: &Dataset) -> Result<f64> {
    if ds.is_empty() {
        return Err(Error::Data("positive rate of an empty dataset".into()));
    }
    Ok(ds.n_positive() as f64 / ds.n_rows() as f64)
}

/// Reads a headered CSV. Cells equal to `missing_token` (after trimming) become
/// missing; rows with a missing target are rejected.
pub fn load_csv(path: impl AsRef<Path>, target_column: &str, missing_token: &str) -> Result<Dataset> {
    let path = path.as_ref();
    let csv_err = |source| Error::Csv {
        path: path.to_path_buf(),
        source,
    };
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(false)
        .from_path(path)
        .map_err(csv_err)?;
    let header: Vec<String> = reader
        .headers()
        .map_err(csv_err)?
        .iter()
        .map(|h| h.trim().to_string())
        .collect();
    let target_idx = header
        .iter()
        .position(|h| h == target_column)
        .ok_or_else(|| Error::UnknownTarget(target_column.to_string()))?;
    let feature_names: Vec<String> = header
        .iter()
        .enumerate()
        .filter(|&(j, _)| j != target_idx)
        .map(|(_, h)| h.clone())
        .collect();

    let missing_token = missing_token.trim();
    let mut features = Vec::new();
    let mut labels = Vec::new();
    for (row, record) in reader.records().enumerate() {
        let record = record.map_err(csv_err)?;
        // Data rows are numbered from 1, matching line numbers below the header.
        let row = row + 1;
        for (j, cell) in record.iter().enumerate() {
            let cell = cell.trim();
            if j == target_idx {
                let y = match cell {
                    "0" | "0.0" => 0,
                    "1" | "1.0" => 1,
                    _ => {
                        return Err(Error::NonBinaryTarget {
                            row,
                            value: cell.to_string(),
                        })
                    }
                };
                labels.push(y);
            } else if cell == missing_token {
                features.push(f64::NAN);
            } else {
                let v: f64 = cell.parse().map_err(|_| {
                    Error::Data(format!(
                        "row {row}, column `{}`: `{cell}` is not a number",
                        header[j]
                    ))
                })?;
                if !v.is_finite() {
                    return Err(Error::Data(format!(
                        "row {row}, column `{}`: non-finite value",
                        header[j]
                    )));
                }
                features.push(v);
            }
        }
    }
    Dataset::new(features, labels, feature_names)
}

/// Writes `ds` with the target as the last column; missing cells are written
/// as `missing_token`.
pub fn write_csv(ds: &Dataset, path: impl AsRef<Path>, target_name: &str, missing_token: &str) -> Result<()> {
    let path = path.as_ref();
    let csv_err = |source| Error::Csv {
        path: path.to_path_buf(),
        source,
    };
    let mut writer = csv::Writer::from_path(path).map_err(csv_err)?;
    let mut header: Vec<&str> = ds.feature_names().iter().map(String::as_str).collect();
    header.push(target_name);
    writer.write_record(&header).map_err(csv_err)?;
    let mut record = Vec::with_capacity(header.len());
    for (i, row) in ds.rows().enumerate() {
        record.clear();
        record.extend(row.iter().map(|v| {
            if v.is_nan() {
                missing_token.to_string()
            } else {
                v.to_string()
            }
        }));
        record.push(ds.label(i).to_string());
        writer.write_record(&record).map_err(csv_err)?;
    }
    writer.flush().map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

/// Removes columns whose missing fraction is strictly greater than `threshold`.
pub fn drop_high_missing(ds: &Dataset, threshold: f64) -> Result<(Dataset, Vec<usize>)> {
    if !(0.0..=1.0).contains(&threshold) {
        return Err(Error::param("threshold", "must lie in [0, 1]"));
    }
    if ds.is_empty() {
        return Err(Error::Data("cannot compute missing fractions of an empty dataset".into()));
    }
    let n = ds.n_rows() as f64;
    let kept: Vec<usize> = (0..ds.n_features())
        .filter(|&j| {
            let missing = ds.column(j).filter(|v| v.is_nan()).count() as f64;
            missing / n <= threshold
        })
        .collect();
    if kept.is_empty() {
        return Err(Error::EmptyFeatures("dropping high-missing columns"));
    }
    Ok((select_columns(ds, &kept), kept))
}

fn select_columns(ds: &Dataset, cols: &[usize]) -> Dataset {
    let mut features = Vec::with_capacity(ds.n_rows() * cols.len());
    for row in ds.rows() {
        features.extend(cols.iter().map(|&j| row[j]));
    }
    Dataset {
        features,
        labels: ds.labels.clone(),
        feature_names: cols.iter().map(|&j| ds.feature_names[j].clone()).collect(),
    }
}

/// Imputation and standardization statistics fitted on a training partition.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PreprocessStats {
    /// Indices of retained columns in the fitting dataset.
    pub kept_columns: Vec<usize>,
    /// Names of retained columns; used to locate them in other datasets.
    pub kept_names: Vec<String>,
    pub medians: Vec<f64>,
    pub means: Vec<f64>,
    /// Population standard deviations, strictly positive.
    pub stds: Vec<f64>,
    /// Columns removed at fit time for having zero variance.
    pub dropped_constant: Vec<String>,
}

fn median(values: &mut [f64]) -> f64 {
    values.sort_by(f64::total_cmp);
    let m = values.len();
    if m % 2 == 1 {
        values[m / 2]
    } else {
        0.5 * (values[m / 2 - 1] + values[m / 2])
    }
}

/// Fits medians (on observed cells) and then means and population standard
/// deviations of the median-imputed columns.
pub fn fit_preprocess(train: &Dataset, threshold: f64) -> Result<PreprocessStats> {
    if train.is_empty() {
        return Err(Error::Data("cannot fit preprocessing on an empty dataset".into()));
    }
    let (reduced, kept) = drop_high_missing(train, threshold)?;
    let n = reduced.n_rows() as f64;
    let mut stats = PreprocessStats {
        kept_columns: Vec::new(),
        kept_names: Vec::new(),
        medians: Vec::new(),
        means: Vec::new(),
        stds: Vec::new(),
        dropped_constant: Vec::new(),
    };
    for (local, &original) in kept.iter().enumerate() {
        let name = &reduced.feature_names[local];
        let mut observed: Vec<f64> = reduced.column(local).filter(|v| !v.is_nan()).collect();
        if observed.is_empty() {
            return Err(Error::Data(format!("column `{name}` has no observed values")));
        }
        let med = median(&mut observed);
        let imputed = || reduced.column(local).map(|v| if v.is_nan() { med } else { v });
        let mean = imputed().sum::<f64>() / n;
        let var = imputed().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
        let std = var.sqrt();
        if std <= 1e-12 * (1.0 + mean.abs()) {
            stats.dropped_constant.push(name.clone());
            continue;
        }
        stats.kept_columns.push(original);
        stats.kept_names.push(name.clone());
        stats.medians.push(med);
        stats.means.push(mean);
        stats.stds.push(std);
    }
    if stats.kept_columns.is_empty() {
        return Err(Error::EmptyFeatures("dropping constant columns"));
    }
    Ok(stats)
}

/// Imputes with the fitted medians, then standardizes with the fitted means
/// and standard deviations. Columns are matched by name.
pub fn apply_preprocess(ds: &Dataset, stats: &PreprocessStats) -> Result<Dataset> {
    let mut source_cols = Vec::with_capacity(stats.kept_names.len());
    let mut absent = Vec::new();
    for name in &stats.kept_names {
        match ds.column_index(name) {
            Some(j) => source_cols.push(j),
            None => absent.push(name.clone()),
        }
    }
    if !absent.is_empty() {
        return Err(Error::MissingColumns(absent));
    }
    let mut features = Vec::with_capacity(ds.n_rows() * source_cols.len());
    for row in ds.rows() {
        for (k, &j) in source_cols.iter().enumerate() {
            let v = row[j];
            let v = if v.is_nan() { stats.medians[k] } else { v };
            features.push((v - stats.means[k]) / stats.stds[k]);
        }
    }
    Ok(Dataset {
        features,
        labels: ds.labels.clone(),
        feature_names: stats.kept_names.clone(),
    })
}

/// Two isotropic unit-variance Gaussian classes whose means are `separation`
/// apart along the first axis. Positives are centred at `+separation/2`,
/// negatives at `-separation/2`; row order is shuffled.
pub fn generate_synthetic(n: usize, d: usize, positive_rate: f64, separation: f64, seed: u64) -> Result<Dataset> {
    if n < 20 {
        return Err(Error::param("n", "must be at least 20"));
    }
    if d < 2 {
        return Err(Error::param("d", "must be at least 2"));
    }
    if !(positive_rate > 0.0 && positive_rate < 1.0) {
        return Err(Error::param("positive_rate", "must lie strictly between 0 and 1"));
    }
    if !separation.is_finite() || separation < 0.0 {
        return Err(Error::param("separation", "must be finite and non-negative"));
    }
    let n_pos = (n as f64 * positive_rate).round() as usize;
    if n_pos == 0 || n_pos == n {
        return Err(Error::param(
            "positive_rate",
            format!("yields {n_pos} positives out of {n}; both classes are required"),
        ));
    }
    let mut rng = rng_from_seed(seed);
    let mut labels: Vec<u8> = (0..n).map(|i| u8::from(i < n_pos)).collect();
    labels.shuffle(&mut rng);
    let mut features = Vec::with_capacity(n * d);
    for &y in &labels {
        let shift = if y == 1 { 0.5 * separation } else { -0.5 * separation };
        for j in 0..d {
            let z: f64 = StandardNormal.sample(&mut rng);
            features.push(if j == 0 { z + shift } else { z });
        }
    }
    let names = (1..=d).map(|j| format!("x{j}")).collect();
    Dataset::new(features, labels, names)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    fn write_tmp(contents: &str) -> tempfile::NamedTempFile {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        f.write_all(contents.as_bytes()).unwrap();
        f
    }

    fn col(values: &[f64]) -> Dataset {
        let labels = (0..values.len()).map(|i| (i % 2) as u8).collect::<Vec<_>>();
        let rows: Vec<Vec<f64>> = values.iter().map(|&v| vec![v, i_plus(v)]).collect();
        Dataset::from_rows(&rows, &labels).unwrap()
    }

    // Second column is a non-constant filler so fits never run out of columns.
    fn i_plus(v: f64) -> f64 {
        if v.is_nan() {
            1.0
        } else {
            v * 0.5 + 3.0
        }
    }

    #[test]
    fn loads_three_row_csv() {
        let f = write_tmp("a,RiskInd,b\n1.5,0,2\n2.5,1,3\n3.5,0,4\n");
        let ds = load_csv(f.path(), "RiskInd", "").unwrap();
        assert_eq!(ds.labels(), &[0, 1, 0]);
        assert_eq!(ds.feature_names(), &["a".to_string(), "b".to_string()]);
        assert_eq!(ds.row(1), &[2.5, 3.0]);
    }

    #[test]
    fn rejects_non_binary_target() {
        let f = write_tmp("a,RiskInd\n1,0\n2,2\n");
        let err = load_csv(f.path(), "RiskInd", "").unwrap_err();
        assert!(matches!(err, Error::NonBinaryTarget { row: 2, .. }), "{err}");
    }

    #[test]
    fn rejects_missing_target_and_unknown_target() {
        let f = write_tmp("a,RiskInd\n1,0\n2,\n");
        assert!(matches!(
            load_csv(f.path(), "RiskInd", "").unwrap_err(),
            Error::NonBinaryTarget { .. }
        ));
        assert!(matches!(
            load_csv(f.path(), "Nope", "").unwrap_err(),
            Error::UnknownTarget(_)
        ));
    }

    #[test]
    fn rejects_ragged_rows() {
        let f = write_tmp("a,b,y\n1,2,0\n1,1\n");
        assert!(matches!(load_csv(f.path(), "y", "").unwrap_err(), Error::Csv { .. }));
    }

    #[test]
    fn empty_cell_is_missing_and_row_kept() {
        let f = write_tmp("a,b,y\n1,,0\n2,5,1\n");
        let ds = load_csv(f.path(), "y", "").unwrap();
        assert_eq!(ds.n_rows(), 2);
        assert!(ds.value(0, 1).is_nan());
        let f = write_tmp("a,b,y\n1,NA,0\n2,5,1\n");
        let ds = load_csv(f.path(), "y", "NA").unwrap();
        assert!(ds.value(0, 1).is_nan());
    }

    #[test]
    fn csv_round_trip_is_lossless() {
        let ds = generate_synthetic(50, 3, 0.2, 1.0, 3).unwrap();
        let f = tempfile::NamedTempFile::new().unwrap();
        write_csv(&ds, f.path(), "RiskInd", "").unwrap();
        let back = load_csv(f.path(), "RiskInd", "").unwrap();
        assert_eq!(back, ds);
    }

    #[test]
    fn drop_high_missing_threshold_rule() {
        let nan = f64::NAN;
        // Column 0: 8/10 missing, column 1: 7/10 missing, column 2: none.
        let rows: Vec<Vec<f64>> = (0..10)
            .map(|i| {
                vec![
                    if i < 8 { nan } else { i as f64 },
                    if i < 7 { nan } else { i as f64 },
                    i as f64,
                ]
            })
            .collect();
        let labels: Vec<u8> = (0..10).map(|i| (i % 2) as u8).collect();
        let ds = Dataset::from_rows(&rows, &labels).unwrap();
        let (out, kept) = drop_high_missing(&ds, 0.70).unwrap();
        assert_eq!(kept, vec![1, 2]);
        assert_eq!(out.feature_names(), &["x2".to_string(), "x3".to_string()]);
        let (_, kept) = drop_high_missing(&ds, 0.0).unwrap();
        assert_eq!(kept, vec![2]);
        assert!(drop_high_missing(&ds, 1.5).is_err());
    }

    #[test]
    fn all_columns_dropped_is_an_error() {
        let nan = f64::NAN;
        let ds = Dataset::from_rows(&[vec![nan, nan], vec![nan, 1.0]], &[0, 1]).unwrap();
        assert!(matches!(
            drop_high_missing(&ds, 0.4).unwrap_err(),
            Error::EmptyFeatures(_)
        ));
    }

    #[test]
    fn median_ignores_missing() {
        let ds = col(&[1.0, 3.0, f64::NAN]);
        let stats = fit_preprocess(&ds, 0.7).unwrap();
        assert_eq!(stats.medians[0], 2.0);
    }

    #[test]
    fn constant_column_is_dropped() {
        let ds = Dataset::from_rows(
            &[vec![5.0, 1.0], vec![5.0, 2.0], vec![5.0, 3.0], vec![5.0, 4.0]],
            &[0, 1, 0, 1],
        )
        .unwrap();
        let stats = fit_preprocess(&ds, 0.7).unwrap();
        assert_eq!(stats.kept_names, vec!["x2".to_string()]);
        assert_eq!(stats.dropped_constant, vec!["x1".to_string()]);
    }

    #[test]
    fn population_std_convention() {
        let ds = col(&[0.0, 0.0, 0.0, 10.0]);
        let stats = fit_preprocess(&ds, 0.7).unwrap();
        assert_eq!(stats.means[0], 2.5);
        // sqrt(((3 * 2.5^2) + 7.5^2) / 4) = sqrt(75 / 4)
        assert!((stats.stds[0] - (75.0f64 / 4.0).sqrt()).abs() < 1e-12);
    }

    #[test]
    fn standardizes_fitting_set() {
        let mut ds = generate_synthetic(200, 4, 0.3, 1.0, 11).unwrap();
        ds.features[3] = f64::NAN;
        ds.features[17] = f64::NAN;
        let stats = fit_preprocess(&ds, 0.7).unwrap();
        let out = apply_preprocess(&ds, &stats).unwrap();
        assert!(!out.has_missing());
        for j in 0..out.n_features() {
            let n = out.n_rows() as f64;
            let mean = out.column(j).sum::<f64>() / n;
            let var = out.column(j).map(|v| (v - mean).powi(2)).sum::<f64>() / n;
            assert!(mean.abs() < 1e-9);
            assert!((var.sqrt() - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn validation_missing_uses_training_median() {
        let train = Dataset::from_rows(&[vec![1.0, 0.0], vec![2.0, 1.0], vec![6.0, 2.0]], &[0, 1, 0]).unwrap();
        let stats = fit_preprocess(&train, 0.7).unwrap();
        let valid = Dataset::from_rows(&[vec![f64::NAN, 1.0]], &[1]).unwrap();
        let out = apply_preprocess(&valid, &stats).unwrap();
        let expected = (2.0 - stats.means[0]) / stats.stds[0];
        assert_eq!(out.value(0, 0), expected);
    }

    #[test]
    fn identity_stats_leave_data_unchanged() {
        let ds = generate_synthetic(30, 3, 0.3, 1.0, 1).unwrap();
        let stats = PreprocessStats {
            kept_columns: vec![0, 1, 2],
            kept_names: ds.feature_names().to_vec(),
            medians: vec![9.0; 3],
            means: vec![0.0; 3],
            stds: vec![1.0; 3],
            dropped_constant: vec![],
        };
        assert_eq!(apply_preprocess(&ds, &stats).unwrap(), ds);
    }

    #[test]
    fn apply_reports_absent_columns() {
        let ds = generate_synthetic(30, 3, 0.3, 1.0, 1).unwrap();
        let stats = fit_preprocess(&ds, 0.7).unwrap();
        let narrow = Dataset::from_rows(&[vec![1.0, 2.0]], &[0]).unwrap();
        match apply_preprocess(&narrow, &stats).unwrap_err() {
            Error::MissingColumns(cols) => assert_eq!(cols, vec!["x3".to_string()]),
            other => panic!("unexpected {other}"),
        }
    }

    #[test]
    fn synthetic_counts_and_determinism() {
        let a = generate_synthetic(1000, 10, 0.074, 1.5, 5).unwrap();
        assert_eq!(a.n_positive(), 74);
        assert_eq!(positive_rate(&a).unwrap(), 0.074);
        let b = generate_synthetic(1000, 10, 0.074, 1.5, 5).unwrap();
        assert_eq!(
            a.features().iter().map(|v| v.to_bits()).collect::<Vec<_>>(),
            b.features().iter().map(|v| v.to_bits()).collect::<Vec<_>>()
        );
        assert_eq!(a.labels(), b.labels());
        assert_ne!(generate_synthetic(1000, 10, 0.074, 1.5, 6).unwrap(), a);
    }

    #[test]
    fn synthetic_rejects_degenerate_parameters() {
        assert!(generate_synthetic(10, 3, 0.5, 1.0, 0).is_err());
        assert!(generate_synthetic(100, 1, 0.5, 1.0, 0).is_err());
        assert!(generate_synthetic(100, 3, 0.0, 1.0, 0).is_err());
        assert!(generate_synthetic(100, 3, 1.0, 1.0, 0).is_err());
        assert!(generate_synthetic(100, 3, 0.001, 1.0, 0).is_err());
    }

    #[test]
    fn positive_rate_examples() {
        let ds = Dataset::from_rows(&[vec![0.0], vec![1.0], vec![2.0], vec![3.0]], &[1, 0, 0, 0]).unwrap();
        assert_eq!(positive_rate(&ds).unwrap(), 0.25);
        let ones = Dataset::from_rows(&[vec![0.0], vec![1.0]], &[1, 1]).unwrap();
        assert_eq!(positive_rate(&ones).unwrap(), 1.0);
        let empty = Dataset::new(vec![], vec![], vec!["a".into()]).unwrap();
        assert!(positive_rate(&empty).is_err());
    }

    #[test]
    fn duplicate_names_rejected() {
        assert!(Dataset::new(vec![1.0, 2.0], vec![0], vec!["a".into(), "a".into()]).is_err());
    }
}
