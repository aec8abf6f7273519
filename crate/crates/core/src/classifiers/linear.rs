//! Logistic regression, plain and L1-regularized.
//!
//! Both minimize the mean negative log-likelihood
//! `f(b, w) = (1/n) sum_i [softplus(eta_i) - y_i eta_i]`, `eta_i = b + x_i . w`.
//! The L1 variant adds `lambda * |w|_1`; the intercept `b` is not penalized.

use serde::{Deserialize, Serialize};

use crate::data::Dataset;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LinearParams {
    pub max_iter: usize,
    pub tol: f64,
}

impl Default for LinearParams {
    fn default() -> Self {
        Self {
            max_iter: 5000,
            tol: 1e-6,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainingLog {
    pub iterations: usize,
    pub final_objective: f64,
    pub converged: bool,
    /// Objective after initialization and after every accepted step.
    pub objective_trace: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearModel {
    pub intercept: f64,
    pub coefficients: Vec<f64>,
    pub lambda: f64,
    pub training_log: TrainingLog,
}

/// Logistic function, evaluated without overflow for any finite input.
pub fn sigmoid(eta: f64) -> f64 {
    if eta >= 0.0 {
        1.0 / (1.0 + (-eta).exp())
    } else {
        let e = eta.exp();
        e / (1.0 + e)
    }
}

fn softplus(eta: f64) -> f64 {
    if eta > 0.0 {
        eta + (-eta).exp().ln_1p()
    } else {
        eta.exp().ln_1p()
    }
}

impl LinearModel {
    pub fn n_features(&self) -> usize {
        self.coefficients.len()
    }

    pub fn linear_predictor(&self, x: &[f64]) -> Result<f64> {
        if x.len() != self.coefficients.len() {
            return Err(Error::DimensionMismatch {
                expected: self.coefficients.len(),
                got: x.len(),
            });
        }
        Ok(self.intercept + dot(&self.coefficients, x))
    }

    /// Number of coefficients that are exactly zero.
    pub fn n_zero(&self) -> usize {
        self.coefficients.iter().filter(|&&c| c == 0.0).count()
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// `exp(eta) / (1 + exp(eta))` with `eta = intercept + x . coefficients`.
pub fn predict_proba_linear(model: &LinearModel, x: &[f64]) -> Result<f64> {
    model.linear_predictor(x).map(sigmoid)
}

/// Mean negative log-likelihood and its gradient. The gradient has length
/// `d + 1`; entry 0 is the intercept component.
pub fn loss_and_gradient(ds: &Dataset, intercept: f64, coefficients: &[f64]) -> (f64, Vec<f64>) {
    let d = coefficients.len();
    let mut grad = vec![0.0; d + 1];
    let mut loss = 0.0;
    for (x, &y) in ds.rows().zip(ds.labels()) {
        let eta = intercept + dot(coefficients, x);
        let y = f64::from(y);
        loss += softplus(eta) - y * eta;
        let r = sigmoid(eta) - y;
        grad[0] += r;
        for (g, xj) in grad[1..].iter_mut().zip(x) {
            *g += r * xj;
        }
    }
    let inv_n = 1.0 / ds.n_rows() as f64;
    grad.iter_mut().for_each(|g| *g *= inv_n);
    (loss * inv_n, grad)
}

/// Mean negative log-likelihood plus `lambda * |coefficients|_1`.
pub fn l1_objective(ds: &Dataset, intercept: f64, coefficients: &[f64], lambda: f64) -> f64 {
    loss_and_gradient(ds, intercept, coefficients).0 + lambda * l1_norm(coefficients)
}

fn l1_norm(v: &[f64]) -> f64 {
    v.iter().map(|c| c.abs()).sum()
}

/// `sign(z) * max(|z| - t, 0)`.
pub fn soft_threshold(z: f64, t: f64) -> f64 {
    if z > t {
        z - t
    } else if z < -t {
        z + t
    } else {
        0.0
    }
}

fn check_training_data(ds: &Dataset) -> Result<()> {
    if ds.is_empty() {
        return Err(Error::Data("cannot train on an empty dataset".into()));
    }
    ds.require_both_classes("logistic regression")?;
    if ds.features().iter().any(|v| !v.is_finite()) {
        return Err(Error::Numeric("training features must be finite (preprocess first)".into()));
    }
    Ok(())
}

fn base_rate_logit(ds: &Dataset) -> f64 {
    let p = ds.n_positive() as f64 / ds.n_rows() as f64;
    (p / (1.0 - p)).ln()
}

/// Smallest `lambda` at which the L1 solution has all coefficients zero:
/// the max-norm of the coefficient gradient at `w = 0` with the intercept set
/// to the logit of the base rate.
pub fn lambda_max(ds: &Dataset) -> Result<f64> {
    check_training_data(ds)?;
    let (_, g) = loss_and_gradient(ds, base_rate_logit(ds), &vec![0.0; ds.n_features()]);
    Ok(g[1..].iter().fold(0.0f64, |m, v| m.max(v.abs())))
}

fn max_abs(v: &[f64]) -> f64 {
    v.iter().fold(0.0f64, |m, x| m.max(x.abs()))
}

/// Plain logistic regression by full-batch gradient descent with Armijo
/// backtracking; stops once the gradient max-norm drops below `tol`.
pub fn train_lr(ds: &Dataset, params: &LinearParams) -> Result<LinearModel> {
    check_training_data(ds)?;
    let d = ds.n_features();
    let mut w = vec![0.0; d + 1];
    w[0] = base_rate_logit(ds);
    let (mut f, mut g) = loss_and_gradient(ds, w[0], &w[1..]);
    let mut trace = vec![f];
    let mut step = 1.0f64;
    let mut converged = false;
    let mut iterations = 0;
    'outer: while iterations < params.max_iter {
        if max_abs(&g) < params.tol {
            converged = true;
            break;
        }
        iterations += 1;
        let g_sq: f64 = g.iter().map(|v| v * v).sum();
        step = (step * 2.0).min(1e6);
        loop {
            let cand: Vec<f64> = w.iter().zip(&g).map(|(wi, gi)| wi - step * gi).collect();
            let (fc, gc) = loss_and_gradient(ds, cand[0], &cand[1..]);
            if !fc.is_finite() {
                return Err(Error::Numeric("logistic loss became non-finite".into()));
            }
            if fc <= f - 0.5 * step * g_sq {
                w = cand;
                f = fc;
                g = gc;
                trace.push(f);
                break;
            }
            step *= 0.5;
            if step < 1e-18 {
                break 'outer;
            }
        }
    }
    log::trace!("LR: {iterations} iterations, objective {f}, converged {converged}");
    Ok(LinearModel {
        intercept: w[0],
        coefficients: w[1..].to_vec(),
        lambda: 0.0,
        training_log: TrainingLog {
            iterations,
            final_objective: f,
            converged,
            objective_trace: trace,
        },
    })
}

/// Subgradient optimality of the L1 problem at `w` with smooth gradient `g`.
pub fn l1_optimality_gap(w: &[f64], g: &[f64], lambda: f64) -> f64 {
    let mut gap = g[0].abs();
    for (wj, gj) in w[1..].iter().zip(&g[1..]) {
        let v = if *wj == 0.0 {
            (gj.abs() - lambda).max(0.0)
        } else {
            (gj + lambda * wj.signum()).abs()
        };
        gap = gap.max(v);
    }
    gap
}

/// L1-regularized logistic regression by proximal gradient (ISTA) with
/// backtracking. Every accepted step does not increase the objective; the loop
/// exits once the subgradient optimality gap is at most `tol`.
pub fn train_l1lr(ds: &Dataset, lambda: f64, params: &LinearParams) -> Result<LinearModel> {
    if !(lambda >= 0.0) || !lambda.is_finite() {
        return Err(Error::param("lambda", "must be finite and non-negative"));
    }
    check_training_data(ds)?;
    let d = ds.n_features();
    let mut w = vec![0.0; d + 1];
    w[0] = base_rate_logit(ds);
    let (mut f, mut g) = loss_and_gradient(ds, w[0], &w[1..]);
    let mut obj = f + lambda * l1_norm(&w[1..]);
    let mut trace = vec![obj];
    let mut step = 1.0f64;
    let mut converged = false;
    let mut iterations = 0;
    'outer: while iterations < params.max_iter {
        if l1_optimality_gap(&w, &g, lambda) <= params.tol {
            converged = true;
            break;
        }
        iterations += 1;
        step = (step * 2.0).min(1e6);
        loop {
            let mut cand = Vec::with_capacity(d + 1);
            cand.push(w[0] - step * g[0]);
            cand.extend(
                w[1..]
                    .iter()
                    .zip(&g[1..])
                    .map(|(wj, gj)| soft_threshold(wj - step * gj, step * lambda)),
            );
            let (fc, gc) = loss_and_gradient(ds, cand[0], &cand[1..]);
            if !fc.is_finite() {
                return Err(Error::Numeric("logistic loss became non-finite".into()));
            }
            let mut linear = 0.0;
            let mut quad = 0.0;
            for ((c, wi), gi) in cand.iter().zip(&w).zip(&g) {
                let delta = c - wi;
                linear += gi * delta;
                quad += delta * delta;
            }
            let obj_c = fc + lambda * l1_norm(&cand[1..]);
            if fc <= f + linear + quad / (2.0 * step) && obj_c <= obj {
                w = cand;
                f = fc;
                g = gc;
                obj = obj_c;
                trace.push(obj);
                break;
            }
            step *= 0.5;
            if step < 1e-18 {
                break 'outer;
            }
        }
    }
    log::trace!("L1LR(lambda={lambda}): {iterations} iterations, objective {obj}, converged {converged}");
    Ok(LinearModel {
        intercept: w[0],
        coefficients: w[1..].to_vec(),
        lambda,
        training_log: TrainingLog {
            iterations,
            final_objective: obj,
            converged,
            objective_trace: trace,
        },
    })
}
