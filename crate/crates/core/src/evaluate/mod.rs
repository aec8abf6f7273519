//! Classification metrics and plot-ready exports.

mod pca;

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use pca::{pca2, Pca2};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfusionCounts {
    pub tp: usize,
    pub fp: usize,
    pub tn: usize,
    #[serde(rename = "fn")]
    pub fn_: usize,
}

impl ConfusionCounts {
    pub fn total(&self) -> usize {
        self.tp + self.fp + self.tn + self.fn_
    }
}

/// Metrics for one scored validation set. `precision` is `None` when nothing
/// was predicted positive; `recall` is `None` when there are no positives.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricSet {
    pub auc: f64,
    pub recall: Option<f64>,
    pub precision: Option<f64>,
    pub f1: Option<f64>,
    pub threshold: f64,
    pub counts: ConfusionCounts,
}

impl MetricSet {
    pub fn compute(scores: &[f64], labels: &[u8], threshold: f64) -> Result<Self> {
        let counts = confusion(scores, labels, threshold)?;
        let recall = recall(&counts).ok();
        let precision = precision(&counts).ok();
        let f1 = match (precision, recall) {
            (Some(p), Some(r)) => Some(f1(p, r)),
            // Nothing predicted positive: no true positives, so F1 is 0
            // whenever positives exist.
            (None, Some(_)) => Some(0.0),
            _ => None,
        };
        Ok(Self {
            auc: auc(scores, labels)?,
            recall,
            precision,
            f1,
            threshold,
            counts,
        })
    }
}

fn check_lengths(scores: &[f64], labels: &[u8]) -> Result<()> {
    if scores.len() != labels.len() {
        return Err(Error::Data(format!(
            "{} scores but {} labels",
            scores.len(),
            labels.len()
        )));
    }
    if scores.is_empty() {
        return Err(Error::Data("no scores to evaluate".into()));
    }
    if scores.iter().any(|s| s.is_nan()) {
        return Err(Error::Numeric("scores contain NaN".into()));
    }
    Ok(())
}

/// Predicted positive iff `score >= threshold`.
pub fn confusion(scores: &[f64], labels: &[u8], threshold: f64) -> Result<ConfusionCounts> {
    check_lengths(scores, labels)?;
    let mut c = ConfusionCounts {
        tp: 0,
        fp: 0,
        tn: 0,
        fn_: 0,
    };
    for (&s, &y) in scores.iter().zip(labels) {
        match (s >= threshold, y == 1) {
            (true, true) => c.tp += 1,
            (true, false) => c.fp += 1,
            (false, false) => c.tn += 1,
            (false, true) => c.fn_ += 1,
        }
    }
    Ok(c)
}

/// `tp / (tp + fn)`.
pub fn recall(c: &ConfusionCounts) -> Result<f64> {
    if c.tp + c.fn_ == 0 {
        return Err(Error::UndefinedMetric("recall with no actual positives"));
    }
    Ok(c.tp as f64 / (c.tp + c.fn_) as f64)
}

/// `tp / (tp + fp)`.
pub fn precision(c: &ConfusionCounts) -> Result<f64> {
    if c.tp + c.fp == 0 {
        return Err(Error::UndefinedMetric("precision with no predicted positives"));
    }
    Ok(c.tp as f64 / (c.tp + c.fp) as f64)
}

/// Harmonic mean of precision and recall; 0 when both are 0.
pub fn f1(precision: f64, recall: f64) -> f64 {
    if precision + recall <= 0.0 {
        0.0
    } else {
        2.0 * precision * recall / (precision + recall)
    }
}

fn class_totals(labels: &[u8]) -> Result<(usize, usize)> {
    let pos = labels.iter().filter(|&&y| y == 1).count();
    let neg = labels.len() - pos;
    if pos == 0 || neg == 0 {
        return Err(Error::SingleClass("ROC analysis"));
    }
    Ok((pos, neg))
}

/// ROC curve as `(fpr, tpr)` pairs, one per distinct score threshold in
/// descending order. Tied scores form a single step. Starts at `(0, 0)` and
/// ends at `(1, 1)`.
pub fn roc_points(scores: &[f64], labels: &[u8]) -> Result<Vec<(f64, f64)>> {
    check_lengths(scores, labels)?;
    let (pos, neg) = class_totals(labels)?;
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]));
    let mut points = Vec::with_capacity(scores.len() + 1);
    points.push((0.0, 0.0));
    let (mut tp, mut fp) = (0usize, 0usize);
    let mut k = 0;
    while k < order.len() {
        let s = scores[order[k]];
        while k < order.len() && scores[order[k]] == s {
            if labels[order[k]] == 1 {
                tp += 1;
            } else {
                fp += 1;
            }
            k += 1;
        }
        points.push((fp as f64 / neg as f64, tp as f64 / pos as f64));
    }
    Ok(points)
}

/// Trapezoidal area under [`roc_points`]; equals the Mann-Whitney statistic
/// with ties counted one half.
pub fn auc(scores: &[f64], labels: &[u8]) -> Result<f64> {
    let points = roc_points(scores, labels)?;
    Ok(points
        .windows(2)
        .map(|w| (w[1].0 - w[0].0) * (w[1].1 + w[0].1) * 0.5)
        .sum())
}

fn io_err(path: &Path) -> impl FnOnce(csv::Error) -> Error + '_ {
    move |source| Error::Csv {
        path: path.to_path_buf(),
        source,
    }
}

/// Writes ROC points with header `fpr,tpr`.
pub fn write_roc_csv(path: impl AsRef<Path>, points: &[(f64, f64)]) -> Result<()> {
    let path = path.as_ref();
    let mut w = csv::Writer::from_path(path).map_err(io_err(path))?;
    w.write_record(["fpr", "tpr"]).map_err(io_err(path))?;
    for (fpr, tpr) in points {
        w.write_record([fpr.to_string(), tpr.to_string()]).map_err(io_err(path))?;
    }
    w.flush().map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

/// Writes projections with header `pc1,pc2,label`.
pub fn write_pca_csv(path: impl AsRef<Path>, projections: &[[f64; 2]], labels: &[u8]) -> Result<()> {
    let path = path.as_ref();
    if projections.len() != labels.len() {
        return Err(Error::Data("projection and label counts differ".into()));
    }
    let mut w = csv::Writer::from_path(path).map_err(io_err(path))?;
    w.write_record(["pc1", "pc2", "label"]).map_err(io_err(path))?;
    for (p, y) in projections.iter().zip(labels) {
        w.write_record([p[0].to_string(), p[1].to_string(), y.to_string()])
            .map_err(io_err(path))?;
    }
    w.flush().map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn mann_whitney(scores: &[f64], labels: &[u8]) -> f64 {
        let mut num = 0.0;
        let mut pairs = 0.0;
        for (i, &si) in scores.iter().enumerate() {
            for (j, &sj) in scores.iter().enumerate() {
                if labels[i] == 1 && labels[j] == 0 {
                    pairs += 1.0;
                    if si > sj {
                        num += 1.0;
                    } else if si == sj {
                        num += 0.5;
                    }
                }
            }
        }
        num / pairs
    }

    #[test]
    fn confusion_examples() {
        let c = confusion(&[0.9, 0.1], &[1, 0], 0.5).unwrap();
        assert_eq!((c.tp, c.tn, c.fp, c.fn_), (1, 1, 0, 0));
        let scores = [0.2, 0.7, 0.4, 0.9];
        let labels = [1, 0, 0, 1];
        let c = confusion(&scores, &labels, 0.0).unwrap();
        assert_eq!((c.fn_, c.tn), (0, 0));
        let c = confusion(&scores, &labels, 0.9000001).unwrap();
        assert_eq!((c.tp, c.fp), (0, 0));
        assert!(confusion(&[0.1], &[1, 0], 0.5).is_err());
    }

    #[test]
    fn ratio_metrics() {
        let c = ConfusionCounts { tp: 3, fp: 1, tn: 5, fn_: 1 };
        assert_eq!(recall(&c).unwrap(), 0.75);
        assert_eq!(precision(&c).unwrap(), 0.75);
        let none_pred = ConfusionCounts { tp: 0, fp: 0, tn: 5, fn_: 2 };
        assert_eq!(recall(&none_pred).unwrap(), 0.0);
        assert!(precision(&none_pred).is_err());
        let no_pos = ConfusionCounts { tp: 0, fp: 2, tn: 5, fn_: 0 };
        assert!(recall(&no_pos).is_err());
        assert_eq!(precision(&no_pos).unwrap(), 0.0);
        let all = ConfusionCounts { tp: 4, fp: 0, tn: 1, fn_: 0 };
        assert_eq!(recall(&all).unwrap(), 1.0);
        assert_eq!(precision(&all).unwrap(), 1.0);
    }

    #[test]
    fn f1_examples() {
        assert!((f1(0.8, 0.8) - 0.8).abs() < 1e-15);
        assert!((f1(1.0, 0.5) - 2.0 / 3.0).abs() < 1e-15);
        assert_eq!(f1(0.0, 1.0), 0.0);
        assert_eq!(f1(0.0, 0.0), 0.0);
    }

    #[test]
    fn roc_examples() {
        let pts = roc_points(&[0.1, 0.4, 0.35, 0.8], &[0, 0, 1, 1]).unwrap();
        assert_eq!(pts, vec![(0.0, 0.0), (0.0, 0.5), (0.5, 0.5), (0.5, 1.0), (1.0, 1.0)]);
        let flat = roc_points(&[0.3; 5], &[0, 1, 0, 1, 1]).unwrap();
        assert_eq!(flat, vec![(0.0, 0.0), (1.0, 1.0)]);
        let sep = roc_points(&[0.9, 0.8, 0.2, 0.1], &[1, 1, 0, 0]).unwrap();
        assert!(sep.contains(&(0.0, 1.0)));
        assert!(roc_points(&[0.1, 0.2], &[1, 1]).is_err());
    }

    #[test]
    fn auc_examples() {
        assert_eq!(auc(&[0.9, 0.8, 0.2, 0.1], &[1, 1, 0, 0]).unwrap(), 1.0);
        assert_eq!(auc(&[0.4; 6], &[1, 0, 0, 1, 0, 0]).unwrap(), 0.5);
        assert_eq!(auc(&[0.1, 0.4, 0.35, 0.8], &[0, 0, 1, 1]).unwrap(), 0.75);
    }

    #[test]
    fn metric_set_is_self_consistent() {
        let scores = [0.9, 0.6, 0.55, 0.3, 0.2, 0.7];
        let labels = [1, 0, 1, 0, 1, 0];
        let m = MetricSet::compute(&scores, &labels, 0.5).unwrap();
        let p = precision(&m.counts).unwrap();
        let r = recall(&m.counts).unwrap();
        assert_eq!(m.precision, Some(p));
        assert_eq!(m.recall, Some(r));
        assert!((m.f1.unwrap() - 2.0 * p * r / (p + r)).abs() < 1e-12);
        assert_eq!(m.counts.total(), 6);
        let silent = MetricSet::compute(&[0.1, 0.2, 0.3], &[1, 0, 1], 0.5).unwrap();
        assert_eq!(silent.precision, None);
        assert_eq!(silent.f1, Some(0.0));
    }

    fn instance() -> impl Strategy<Value = (Vec<f64>, Vec<u8>)> {
        (2usize..30).prop_flat_map(|n| {
            (
                prop::collection::vec(0u8..6, n).prop_map(|v| v.into_iter().map(|k| f64::from(k) / 5.0).collect()),
                prop::collection::vec(0u8..2, n),
            )
        })
    }

    proptest! {
        #[test]
        fn auc_matches_pairwise_count((scores, mut labels) in instance()) {
            labels[0] = 1;
            labels[1] = 0;
            let a = auc(&scores, &labels).unwrap();
            prop_assert!((a - mann_whitney(&scores, &labels)).abs() < 1e-9);
        }

        #[test]
        fn auc_invariant_under_monotone_transform((scores, mut labels) in instance()) {
            labels[0] = 1;
            labels[1] = 0;
            let mapped: Vec<f64> = scores.iter().map(|s| (3.0 * s).exp() - 7.0).collect();
            prop_assert!((auc(&scores, &labels).unwrap() - auc(&mapped, &labels).unwrap()).abs() < 1e-12);
        }

        #[test]
        fn auc_invariant_under_negative_duplication((scores, mut labels) in instance(), k in 2usize..4) {
            labels[0] = 1;
            labels[1] = 0;
            let mut s2 = scores.clone();
            let mut l2 = labels.clone();
            for (s, &y) in scores.iter().zip(&labels) {
                if y == 0 {
                    for _ in 1..k {
                        s2.push(*s);
                        l2.push(0);
                    }
                }
            }
            prop_assert!((auc(&scores, &labels).unwrap() - auc(&s2, &l2).unwrap()).abs() < 1e-12);
        }

        #[test]
        fn roc_is_monotone((scores, mut labels) in instance()) {
            labels[0] = 1;
            labels[1] = 0;
            let pts = roc_points(&scores, &labels).unwrap();
            prop_assert_eq!(pts[0], (0.0, 0.0));
            prop_assert_eq!(*pts.last().unwrap(), (1.0, 1.0));
            prop_assert!(pts.windows(2).all(|w| w[1].0 >= w[0].0 && w[1].1 >= w[0].1));
        }
    }
}
