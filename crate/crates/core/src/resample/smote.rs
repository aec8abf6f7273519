use rand::Rng as _;

use super::{require_method, resample, Method, ResampleSpec};
use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::rng::Rng;

/// Exact k nearest neighbours (Euclidean) of every point among `points`,
/// excluding the point itself. Ties break toward the lower index.
pub fn nearest_neighbors(points: &[&[f64]], k: usize) -> Vec<Vec<usize>> {
    let m = points.len();
    (0..m)
        .map(|i| {
            let mut others: Vec<(f64, usize)> = (0..m)
                .filter(|&j| j != i)
                .map(|j| {
                    let d2: f64 = points[i].iter().zip(points[j]).map(|(a, b)| (a - b) * (a - b)).sum();
                    (d2, j)
                })
                .collect();
            let k = k.min(others.len());
            if k < others.len() {
                others.select_nth_unstable_by(k, |a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
                others.truncate(k);
            }
            others.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
            others.into_iter().map(|(_, j)| j).collect()
        })
        .collect()
}

/// Generates `count` synthetic rows (flattened) from the rows listed in `minority`.
pub(super) fn synthesize(ds: &Dataset, minority: &[usize], count: usize, k: usize, rng: &mut Rng) -> Result<Vec<f64>> {
    if minority.len() < k + 1 {
        return Err(Error::TooFewMinority {
            needed: k + 1,
            have: minority.len(),
        });
    }
    if minority.iter().any(|&i| ds.row(i).iter().any(|v| !v.is_finite())) {
        return Err(Error::Data("SMOTE requires finite features; impute missing values first".into()));
    }
    let points: Vec<&[f64]> = minority.iter().map(|&i| ds.row(i)).collect();
    let neighbors = nearest_neighbors(&points, k);
    let d = ds.n_features();
    let mut out = Vec::with_capacity(count * d);
    for _ in 0..count {
        let a = rng.random_range(0..points.len());
        let b = neighbors[a][rng.random_range(0..k)];
        let u: f64 = rng.random();
        out.extend(points[a].iter().zip(points[b]).map(|(x, z)| x + u * (z - x)));
    }
    Ok(out)
}

/// SMOTE oversampling: adds positives on segments between a positive and one
/// of its `smote_k` nearest positive neighbours.
pub fn smote(ds: &Dataset, spec: &ResampleSpec) -> Result<Dataset> {
    require_method(spec, Method::Smote)?;
    resample(ds, spec)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_point_minority_is_collinear() {
        let rows = vec![vec![0.0, 0.0], vec![1.0, 1.0], vec![5.0, -1.0], vec![6.0, -2.0], vec![7.0, 0.0], vec![8.0, 1.0]];
        let labels = [1, 1, 0, 0, 0, 0];
        let ds = Dataset::from_rows(&rows, &labels).unwrap();
        let mut spec = ResampleSpec::new(Method::Smote, 0.5, 7);
        spec.smote_k = 1;
        let out = smote(&ds, &spec).unwrap();
        assert_eq!(out.n_positive(), 4);
        for i in 6..out.n_rows() {
            let r = out.row(i);
            assert_eq!(r[0], r[1]);
            assert!((0.0..=1.0).contains(&r[0]));
        }
    }

    #[test]
    fn too_few_minority_points() {
        let rows = vec![vec![0.0], vec![1.0], vec![2.0], vec![3.0], vec![4.0]];
        let ds = Dataset::from_rows(&rows, &[1, 1, 0, 0, 0]).unwrap();
        let err = smote(&ds, &ResampleSpec::new(Method::Smote, 0.5, 0)).unwrap_err();
        assert!(matches!(err, Error::TooFewMinority { needed: 6, have: 2 }));
    }

    #[test]
    fn neighbors_exclude_self_and_sort_by_distance() {
        let pts: Vec<Vec<f64>> = vec![vec![0.0], vec![1.0], vec![3.0], vec![10.0]];
        let refs: Vec<&[f64]> = pts.iter().map(Vec::as_slice).collect();
        let nn = nearest_neighbors(&refs, 2);
        assert_eq!(nn[0], vec![1, 2]);
        assert_eq!(nn[3], vec![2, 1]);
        assert!(nn.iter().enumerate().all(|(i, l)| !l.contains(&i)));
    }
}
