use rand::Rng as _;

use crate::error::{Error, Result};
use crate::rng::rng_from_seed;

#[derive(Debug, Clone)]
pub struct KMeansResult {
    /// `k x d` row-major centroid matrix.
    pub centroids: Vec<f64>,
    pub assignments: Vec<usize>,
    pub iterations: usize,
    pub converged: bool,
}

fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

fn nearest(point: &[f64], centroids: &[f64], d: usize) -> (usize, f64) {
    centroids
        .chunks_exact(d)
        .enumerate()
        .map(|(c, centroid)| (c, sq_dist(point, centroid)))
        .fold((0, f64::INFINITY), |best, cur| if cur.1 < best.1 { cur } else { best })
}

/// k-means++ seeding: first centre uniform, then proportional to squared
/// distance to the nearest chosen centre. Falls back to a uniform pick among
/// unchosen points once every remaining distance is zero.
fn seed_centroids(points: &[f64], d: usize, k: usize, rng: &mut crate::rng::Rng) -> Vec<f64> {
    let m = points.len() / d;
    let point = |i: usize| &points[i * d..(i + 1) * d];
    let mut chosen = vec![false; m];
    let mut centroids = Vec::with_capacity(k * d);
    let first = rng.random_range(0..m);
    chosen[first] = true;
    centroids.extend_from_slice(point(first));
    let mut dist: Vec<f64> = (0..m).map(|i| sq_dist(point(i), point(first))).collect();
    for _ in 1..k {
        let total: f64 = dist.iter().sum();
        let next = if total > 0.0 {
            let mut target = rng.random::<f64>() * total;
            let mut pick = None;
            for (i, &w) in dist.iter().enumerate() {
                if w <= 0.0 {
                    continue;
                }
                pick = Some(i);
                if target < w {
                    break;
                }
                target -= w;
            }
            pick.expect("positive total implies a positive weight")
        } else {
            let free: Vec<usize> = (0..m).filter(|&i| !chosen[i]).collect();
            free[rng.random_range(0..free.len())]
        };
        chosen[next] = true;
        centroids.extend_from_slice(point(next));
        for (i, di) in dist.iter_mut().enumerate() {
            *di = di.min(sq_dist(point(i), point(next)));
        }
    }
    centroids
}

/// Lloyd's algorithm from k-means++ seeding on `m x d` row-major `points`.
///
/// Stops when no centroid moves by `tol` or more (Euclidean) or after
/// `max_iter` rounds. An empty cluster is reseeded at the point farthest from
/// its assigned centroid.
pub fn kmeans(points: &[f64], d: usize, k: usize, max_iter: usize, tol: f64, seed: u64) -> Result<KMeansResult> {
    if d == 0 || points.is_empty() || points.len() % d != 0 {
        return Err(Error::Data("k-means needs a nonempty m x d point matrix".into()));
    }
    let m = points.len() / d;
    if k == 0 || k > m {
        return Err(Error::param("k", format!("must lie in 1..={m}, got {k}")));
    }
    if points.iter().any(|v| !v.is_finite()) {
        return Err(Error::Numeric("k-means input contains non-finite values".into()));
    }
    let point = |i: usize| &points[i * d..(i + 1) * d];
    let mut rng = rng_from_seed(seed);
    let mut centroids = seed_centroids(points, d, k, &mut rng);
    let mut assignments = vec![0usize; m];
    let mut dists = vec![0.0f64; m];
    let mut converged = false;
    let mut iterations = 0;

    while iterations < max_iter {
        iterations += 1;
        for i in 0..m {
            let (c, dist) = nearest(point(i), &centroids, d);
            assignments[i] = c;
            dists[i] = dist;
        }
        let mut sums = vec![0.0f64; k * d];
        let mut counts = vec![0usize; k];
        for i in 0..m {
            let c = assignments[i];
            counts[c] += 1;
            for (s, v) in sums[c * d..(c + 1) * d].iter_mut().zip(point(i)) {
                *s += v;
            }
        }
        let mut taken = vec![false; m];
        for c in 0..k {
            if counts[c] > 0 {
                continue;
            }
            // Farthest point from its own centroid that has not been used yet.
            let far = (0..m)
                .filter(|&i| !taken[i] && counts[assignments[i]] > 1)
                .fold(None, |best: Option<usize>, i| match best {
                    Some(b) if dists[b] >= dists[i] => Some(b),
                    _ => Some(i),
                });
            if let Some(i) = far {
                taken[i] = true;
                let old = assignments[i];
                counts[old] -= 1;
                for (s, v) in sums[old * d..(old + 1) * d].iter_mut().zip(point(i)) {
                    *s -= v;
                }
                assignments[i] = c;
                dists[i] = 0.0;
                counts[c] = 1;
                sums[c * d..(c + 1) * d].copy_from_slice(point(i));
            }
        }
        let mut max_shift = 0.0f64;
        for c in 0..k {
            if counts[c] == 0 {
                continue;
            }
            let inv = 1.0 / counts[c] as f64;
            let mut shift = 0.0;
            for j in 0..d {
                let new = sums[c * d + j] * inv;
                let delta = new - centroids[c * d + j];
                shift += delta * delta;
                centroids[c * d + j] = new;
            }
            max_shift = max_shift.max(shift.sqrt());
        }
        if max_shift < tol {
            converged = true;
            break;
        }
    }
    for i in 0..m {
        assignments[i] = nearest(point(i), &centroids, d).0;
    }
    Ok(KMeansResult {
        centroids,
        assignments,
        iterations,
        converged,
    })
}
