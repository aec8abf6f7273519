use crate::data::Dataset;
use crate::error::{Error, Result};

const POWER_MAX_ITER: usize = 20_000;
const POWER_TOL: f64 = 1e-13;

/// Projection of a dataset onto its first two principal components.
#[derive(Debug, Clone)]
pub struct Pca2 {
    pub projections: Vec<[f64; 2]>,
    /// Unit-norm loading vectors.
    pub components: [Vec<f64>; 2],
    /// Eigenvalues of the population covariance matrix.
    pub variances: [f64; 2],
    pub warnings: Vec<String>,
}

fn mat_vec(c: &[f64], d: usize, v: &[f64]) -> Vec<f64> {
    (0..d).map(|i| c[i * d..(i + 1) * d].iter().zip(v).map(|(a, b)| a * b).sum()).collect()
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

fn orthogonalize(v: &mut [f64], against: &[Vec<f64>]) {
    for u in against {
        let proj: f64 = v.iter().zip(u).map(|(a, b)| a * b).sum();
        v.iter_mut().zip(u).for_each(|(a, b)| *a -= proj * b);
    }
}

/// Leading eigenpair of the symmetric PSD matrix `c`, restricted to the
/// orthogonal complement of `against`.
fn power_iteration(c: &[f64], d: usize, against: &[Vec<f64>]) -> (f64, Vec<f64>) {
    // Deterministic start that is unlikely to be orthogonal to any eigenvector.
    let mut v: Vec<f64> = (0..d).map(|j| 1.0 + 0.1 * j as f64 + 0.01 * (j * j) as f64).collect();
    orthogonalize(&mut v, against);
    let n0 = norm(&v);
    if n0 == 0.0 {
        return (0.0, v);
    }
    v.iter_mut().for_each(|x| *x /= n0);
    for _ in 0..POWER_MAX_ITER {
        let mut w = mat_vec(c, d, &v);
        orthogonalize(&mut w, against);
        let nw = norm(&w);
        if nw <= f64::MIN_POSITIVE {
            return (0.0, v);
        }
        w.iter_mut().for_each(|x| *x /= nw);
        let delta = v.iter().zip(&w).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        v = w;
        if delta < POWER_TOL {
            break;
        }
    }
    let cv = mat_vec(c, d, &v);
    let lambda = v.iter().zip(&cv).map(|(a, b)| a * b).sum();
    (lambda, v)
}

fn fix_sign(v: &mut [f64]) {
    let lead = v.iter().copied().fold(0.0f64, |m, x| if x.abs() > m.abs() { x } else { m });
    if lead < 0.0 {
        v.iter_mut().for_each(|x| *x = -*x);
    }
}

/// Centres the columns, finds the top two covariance eigenvectors by power
/// iteration with deflation and projects every row onto them. Each loading
/// vector has its largest-magnitude entry positive. If the data has rank
/// below two the second component is zero and a warning is recorded.
pub fn pca2(ds: &Dataset) -> Result<Pca2> {
    let (n, d) = (ds.n_rows(), ds.n_features());
    if d < 2 || n < 3 {
        return Err(Error::Data(format!("PCA needs d >= 2 and n >= 3, got n={n}, d={d}")));
    }
    if ds.features().iter().any(|v| !v.is_finite()) {
        return Err(Error::Numeric("PCA input must be finite".into()));
    }
    let means: Vec<f64> = (0..d).map(|j| ds.column(j).sum::<f64>() / n as f64).collect();
    let mut cov = vec![0.0; d * d];
    for row in ds.rows() {
        for i in 0..d {
            let ci = row[i] - means[i];
            for j in i..d {
                cov[i * d + j] += ci * (row[j] - means[j]);
            }
        }
    }
    for i in 0..d {
        for j in i..d {
            cov[i * d + j] /= n as f64;
            cov[j * d + i] = cov[i * d + j];
        }
    }
    let mut warnings = Vec::new();
    let (l1, mut v1) = power_iteration(&cov, d, &[]);
    fix_sign(&mut v1);
    let (mut l2, mut v2) = power_iteration(&cov, d, std::slice::from_ref(&v1));
    let scale = l1.abs().max(f64::MIN_POSITIVE);
    if l1 <= 0.0 || l2 <= 1e-12 * scale {
        warnings.push("data has rank below 2; second principal component set to zero".to_string());
        l2 = 0.0;
        v2 = vec![0.0; d];
    } else {
        fix_sign(&mut v2);
    }
    let projections = ds
        .rows()
        .map(|row| {
            let mut p = [0.0; 2];
            for j in 0..d {
                let c = row[j] - means[j];
                p[0] += c * v1[j];
                p[1] += c * v2[j];
            }
            p
        })
        .collect();
    Ok(Pca2 {
        projections,
        components: [v1, v2],
        variances: [l1, l2],
        warnings,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::generate_synthetic;

    fn dist(a: &[f64], b: &[f64]) -> f64 {
        a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt()
    }

    #[test]
    fn two_d_projection_preserves_distances() {
        let rows: Vec<Vec<f64>> = (0..12)
            .map(|i| {
                let t = i as f64;
                vec![3.0 * (t * 0.7).sin() + t * 0.2, 0.5 * (t * 1.3).cos()]
            })
            .collect();
        let labels: Vec<u8> = (0..12).map(|i| (i % 2) as u8).collect();
        let ds = Dataset::from_rows(&rows, &labels).unwrap();
        let p = pca2(&ds).unwrap();
        for i in 0..12 {
            for j in 0..12 {
                let orig = dist(&rows[i], &rows[j]);
                let proj = dist(&p.projections[i], &p.projections[j]);
                assert!((orig - proj).abs() < 1e-6);
            }
        }
    }

    #[test]
    fn duplicated_rows_project_identically() {
        let base = generate_synthetic(30, 4, 0.3, 1.0, 2).unwrap();
        let idx: Vec<usize> = (0..30).chain(0..30).collect();
        let ds = base.select_rows(&idx);
        let p = pca2(&ds).unwrap();
        for i in 0..30 {
            assert_eq!(p.projections[i], p.projections[i + 30]);
        }
    }

    #[test]
    fn components_orthonormal_and_ordered() {
        let ds = generate_synthetic(200, 5, 0.3, 3.0, 9).unwrap();
        let p = pca2(&ds).unwrap();
        assert!(p.variances[0] >= p.variances[1]);
        let dot: f64 = p.components[0].iter().zip(&p.components[1]).map(|(a, b)| a * b).sum();
        assert!(dot.abs() < 1e-9);
        let cross: f64 = p.projections.iter().map(|q| q[0] * q[1]).sum::<f64>() / 200.0;
        assert!(cross.abs() < 1e-6);
    }

    #[test]
    fn rank_one_data_zero_fills() {
        let rows: Vec<Vec<f64>> = (0..10).map(|i| vec![i as f64, 2.0 * i as f64]).collect();
        let labels: Vec<u8> = (0..10).map(|i| (i % 2) as u8).collect();
        let ds = Dataset::from_rows(&rows, &labels).unwrap();
        let p = pca2(&ds).unwrap();
        assert_eq!(p.warnings.len(), 1);
        assert!(p.projections.iter().all(|q| q[1] == 0.0));
    }

    #[test]
    fn rejects_tiny_inputs() {
        let ds = Dataset::from_rows(&[vec![1.0, 2.0], vec![2.0, 1.0]], &[0, 1]).unwrap();
        assert!(pca2(&ds).is_err());
    }
}
