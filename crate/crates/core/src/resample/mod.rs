//! Resampling a training set to a target positive fraction.
//!
//! Undersamplers (RUS, CCUS) keep every positive and shrink the negatives;
//! oversamplers (ROS, SMOTE) keep every negative and grow the positives. When
//! the target cannot be reached in the method's direction the resampler
//! returns its input unchanged.

mod kmeans;
mod smote;

use std::fmt;
use std::str::FromStr;

use rand::seq::index;
use rand::Rng as _;
use serde::{Deserialize, Serialize};

use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::rng::rng_from_seed;

pub use kmeans::{kmeans, KMeansResult};
pub use smote::{nearest_neighbors, smote};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Method {
    None,
    Rus,
    Ccus,
    Ros,
    Smote,
}

impl Method {
    pub const RESAMPLERS: [Method; 4] = [Method::Rus, Method::Ccus, Method::Ros, Method::Smote];

    pub fn direction(self) -> Option<Direction> {
        match self {
            Method::None => None,
            Method::Rus | Method::Ccus => Some(Direction::Under),
            Method::Ros | Method::Smote => Some(Direction::Over),
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Method::None => "NONE",
            Method::Rus => "RUS",
            Method::Ccus => "CCUS",
            Method::Ros => "ROS",
            Method::Smote => "SMOTE",
        }
    }

    pub(crate) fn tag(self) -> u64 {
        self as u64
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_uppercase().as_str() {
            "NONE" | "ORIGINAL" => Ok(Method::None),
            "RUS" => Ok(Method::Rus),
            "CCUS" => Ok(Method::Ccus),
            "ROS" => Ok(Method::Ros),
            "SMOTE" => Ok(Method::Smote),
            _ => Err(Error::param(
                "method",
                format!("unknown resampling method `{s}` (expected RUS, CCUS, ROS, SMOTE or NONE)"),
            )),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    Under,
    Over,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResampleSpec {
    pub method: Method,
    pub target_positive: f64,
    pub smote_k: usize,
    pub kmeans_max_iter: usize,
    pub kmeans_tol: f64,
    pub seed: u64,
}

impl ResampleSpec {
    pub fn new(method: Method, target_positive: f64, seed: u64) -> Self {
        Self {
            method,
            target_positive,
            smote_k: 5,
            kmeans_max_iter: 100,
            kmeans_tol: 1e-6,
            seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.target_positive > 0.0 && self.target_positive < 1.0) {
            return Err(Error::param("target_positive", "must lie strictly between 0 and 1"));
        }
        if self.smote_k == 0 {
            return Err(Error::param("smote_k", "must be at least 1"));
        }
        if self.kmeans_max_iter == 0 {
            return Err(Error::param("kmeans_max_iter", "must be at least 1"));
        }
        if !(self.kmeans_tol > 0.0) {
            return Err(Error::param("kmeans_tol", "must be positive"));
        }
        Ok(())
    }
}

fn round_half_up(x: f64) -> usize {
    (x + 0.5).floor() as usize
}

/// Output class counts for resampling `(n_pos, n_neg)` toward positive
/// fraction `p` in the given direction.
///
/// Undersampling keeps the positives and asks for `round(n_pos (1-p)/p)`
/// negatives, capped at `n_neg`. Oversampling keeps the negatives and asks for
/// `round(n_neg p/(1-p))` positives, floored at `n_pos`.
pub fn target_counts(n_pos: usize, n_neg: usize, p: f64, direction: Direction) -> Result<(usize, usize)> {
    if n_pos == 0 || n_neg == 0 {
        return Err(Error::SingleClass("target_counts"));
    }
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::param("target_positive", "must lie strictly between 0 and 1"));
    }
    Ok(match direction {
        Direction::Under => {
            let neg = round_half_up(n_pos as f64 * (1.0 - p) / p);
            (n_pos, neg.clamp(1, n_neg))
        }
        Direction::Over => {
            let pos = round_half_up(n_neg as f64 * p / (1.0 - p));
            (pos.max(n_pos), n_neg)
        }
    })
}

/// Resampled data plus, for every output row, the input row it was copied
/// from (`None` for synthetic rows such as SMOTE points or CCUS centroids).
#[derive(Debug, Clone)]
pub struct Resampled {
    pub data: Dataset,
    pub origin: Vec<Option<usize>>,
}

impl Resampled {
    fn identity(ds: &Dataset) -> Self {
        Self {
            data: ds.clone(),
            origin: (0..ds.n_rows()).map(Some).collect(),
        }
    }

    pub fn n_synthetic(&self) -> usize {
        self.origin.iter().filter(|o| o.is_none()).count()
    }
}

fn class_indices(ds: &Dataset) -> (Vec<usize>, Vec<usize>) {
    (0..ds.n_rows()).partition(|&i| ds.label(i) == 1)
}

/// Applies `spec` to `ds` and records row provenance.
pub fn resample_tracked(ds: &Dataset, spec: &ResampleSpec) -> Result<Resampled> {
    spec.validate()?;
    let Some(direction) = spec.method.direction() else {
        return Ok(Resampled::identity(ds));
    };
    ds.require_both_classes("resampling")?;
    let (pos, neg) = class_indices(ds);
    let (pos_out, neg_out) = target_counts(pos.len(), neg.len(), spec.target_positive, direction)?;
    if pos_out == pos.len() && neg_out == neg.len() {
        return Ok(Resampled::identity(ds));
    }
    let mut rng = rng_from_seed(spec.seed);
    match spec.method {
        Method::Rus => {
            let mut keep: Vec<usize> = index::sample(&mut rng, neg.len(), neg_out)
                .into_iter()
                .map(|k| neg[k])
                .chain(pos.iter().copied())
                .collect();
            keep.sort_unstable();
            Ok(Resampled {
                data: ds.select_rows(&keep),
                origin: keep.into_iter().map(Some).collect(),
            })
        }
        Method::Ros => {
            let extra: Vec<usize> = (0..pos_out - pos.len())
                .map(|_| pos[rng.random_range(0..pos.len())])
                .collect();
            let mut rows: Vec<usize> = (0..ds.n_rows()).collect();
            rows.extend_from_slice(&extra);
            Ok(Resampled {
                data: ds.select_rows(&rows),
                origin: rows.into_iter().map(Some).collect(),
            })
        }
        Method::Ccus => {
            let negatives = ds.select_rows(&neg);
            let fit = kmeans(
                negatives.features(),
                ds.n_features(),
                neg_out,
                spec.kmeans_max_iter,
                spec.kmeans_tol,
                spec.seed,
            )?;
            let positives = ds.select_rows(&pos);
            let data = positives.with_extra_rows(&fit.centroids, &vec![0; neg_out]);
            let origin = pos.iter().map(|&i| Some(i)).chain((0..neg_out).map(|_| None)).collect();
            Ok(Resampled { data, origin })
        }
        Method::Smote => {
            let synthetic = smote::synthesize(ds, &pos, pos_out - pos.len(), spec.smote_k, &mut rng)?;
            let n_new = synthetic.len() / ds.n_features();
            let data = ds.with_extra_rows(&synthetic, &vec![1; n_new]);
            let origin = (0..ds.n_rows()).map(Some).chain((0..n_new).map(|_| None)).collect();
            Ok(Resampled { data, origin })
        }
        Method::None => unreachable!("handled above"),
    }
}

/// Applies `spec` to `ds`.
pub fn resample(ds: &Dataset, spec: &ResampleSpec) -> Result<Dataset> {
    resample_tracked(ds, spec).map(|r| r.data)
}

fn require_method(spec: &ResampleSpec, method: Method) -> Result<()> {
    if spec.method != method {
        return Err(Error::param(
            "method",
            format!("expected {method}, spec says {}", spec.method),
        ));
    }
    Ok(())
}

/// Random undersampling without replacement of the negatives.
pub fn rus(ds: &Dataset, spec: &ResampleSpec) -> Result<Dataset> {
    require_method(spec, Method::Rus)?;
    resample(ds, spec)
}

/// Cluster-centroid undersampling: negatives are replaced by k-means centroids.
pub fn ccus(ds: &Dataset, spec: &ResampleSpec) -> Result<Dataset> {
    require_method(spec, Method::Ccus)?;
    resample(ds, spec)
}

/// Random oversampling with replacement of the positives.
pub fn ros(ds: &Dataset, spec: &ResampleSpec) -> Result<Dataset> {
    require_method(spec, Method::Ros)?;
    resample(ds, spec)
}
