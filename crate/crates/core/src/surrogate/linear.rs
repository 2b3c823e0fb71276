// SPDX-License-Identifier: Apache-2.0

//! Linear families: single-feature least squares, ridge, Bayesian ridge and PLS.

use nalgebra::{DMatrix, DVector};

use super::model::Params;
use crate::error::{Error, Result};

/// Column means and the centered copy of `x`; `y` is centered alongside.
fn center(x: &DMatrix<f64>, y: &DVector<f64>) -> (DVector<f64>, DMatrix<f64>, f64, DVector<f64>) {
    let means = DVector::from_iterator(x.ncols(), x.column_iter().map(|c| c.mean()));
    let mut xc = x.clone();
    for (j, mut col) in xc.column_iter_mut().enumerate() {
        col.add_scalar_mut(-means[j]);
    }
    let y_mean = y.mean();
    (means, xc, y_mean, y.add_scalar(-y_mean))
}

fn linear(means: &DVector<f64>, y_mean: f64, coef: DVector<f64>) -> (f64, Vec<f64>) {
    (y_mean - means.dot(&coef), coef.as_slice().to_vec())
}

pub(crate) fn single_feature(x: &DMatrix<f64>, y: &DVector<f64>, j: usize) -> Params {
    let col = x.column(j);
    let x_mean = col.mean();
    let y_mean = y.mean();
    let (mut sxy, mut sxx) = (0.0, 0.0);
    for (a, b) in col.iter().zip(y.iter()) {
        sxy += (a - x_mean) * (b - y_mean);
        sxx += (a - x_mean) * (a - x_mean);
    }
    let slope = if sxx > 0.0 { sxy / sxx } else { 0.0 };
    let mut coef = vec![0.0; x.ncols()];
    coef[j] = slope;
    Params::Linear {
        intercept: y_mean - slope * x_mean,
        coef,
    }
}

/// Closed-form penalized least squares via the SVD of the centered design.
pub(crate) fn ridge(x: &DMatrix<f64>, y: &DVector<f64>, alpha: f64) -> Result<Params> {
    let (means, xc, y_mean, yc) = center(x, y);
    let svd = xc.svd(true, true);
    let (u, v_t) = (svd.u.expect("u requested"), svd.v_t.expect("v_t requested"));
    let s = svd.singular_values;
    let s_max = s.max();
    if alpha == 0.0 && (s_max == 0.0 || s.min() <= 1e-10 * s_max || x.nrows() < x.ncols()) {
        return Err(Error::Singular(
            "design matrix is rank deficient; raise the ridge penalty".into(),
        ));
    }
    let uty = u.tr_mul(&yc);
    let scaled = DVector::from_fn(s.len(), |i, _| {
        let d = s[i] * s[i] + alpha;
        if d > 0.0 {
            s[i] / d * uty[i]
        } else {
            0.0
        }
    });
    let (intercept, coef) = linear(&means, y_mean, v_t.tr_mul(&scaled));
    Ok(Params::Linear { intercept, coef })
}

/// Evidence maximization over the noise precision and the weight precision,
/// starting from noise precision `1 / var(y)` and weight precision 1.
pub(crate) fn bayesian_ridge(x: &DMatrix<f64>, y: &DVector<f64>, max_iter: usize, tol: f64) -> Result<Params> {
    // Weakly informative gamma hyperpriors on both precisions.
    const A1: f64 = 1e-6;
    const A2: f64 = 1e-6;
    const L1: f64 = 1e-6;
    const L2: f64 = 1e-6;

    let n = x.nrows() as f64;
    let (means, xc, y_mean, yc) = center(x, y);
    let svd = xc.clone().svd(true, true);
    let (u, v_t) = (svd.u.expect("u requested"), svd.v_t.expect("v_t requested"));
    let s = svd.singular_values;
    let eig = s.map(|v| v * v);
    let uty = u.tr_mul(&yc);
    let coef_for = |alpha: f64, lambda: f64| {
        let scaled = DVector::from_fn(s.len(), |i, _| s[i] / (eig[i] + lambda / alpha) * uty[i]);
        v_t.tr_mul(&scaled)
    };

    let mut alpha = 1.0 / (yc.norm_squared() / n + f64::EPSILON);
    let mut lambda = 1.0;
    let mut iterations = 0;
    while iterations < max_iter {
        iterations += 1;
        let coef = coef_for(alpha, lambda);
        let rss = (&yc - &xc * &coef).norm_squared();
        let gamma: f64 = eig.iter().map(|e| alpha * e / (lambda + alpha * e)).sum();
        let lambda_new = (gamma + 2.0 * L1) / (coef.norm_squared() + 2.0 * L2);
        let alpha_new = (n - gamma + 2.0 * A1) / (rss + 2.0 * A2);
        if !(alpha_new.is_finite() && lambda_new.is_finite()) {
            return Err(Error::Singular("precision update diverged".into()));
        }
        let converged = (alpha_new - alpha).abs() <= tol * alpha_new && (lambda_new - lambda).abs() <= tol * lambda_new;
        alpha = alpha_new;
        lambda = lambda_new;
        if converged {
            break;
        }
    }
    let (intercept, coef) = linear(&means, y_mean, coef_for(alpha, lambda));
    Ok(Params::Bayesian {
        intercept,
        coef,
        noise_precision: alpha,
        weight_precision: lambda,
        iterations,
    })
}

/// Single-response NIPALS partial least squares.
pub(crate) fn pls(x: &DMatrix<f64>, y: &DVector<f64>, n_components: usize) -> Params {
    let (means, xc, y_mean, yc) = center(x, y);
    let p = x.ncols();
    let mut e = xc;
    let mut f = yc;
    let mut ws: Vec<DVector<f64>> = Vec::new();
    let mut ps: Vec<DVector<f64>> = Vec::new();
    let mut qs: Vec<f64> = Vec::new();
    let mut first_norm = None;
    for _ in 0..n_components {
        let mut w = e.tr_mul(&f);
        let norm = w.norm();
        let reference = *first_norm.get_or_insert(norm);
        if norm == 0.0 || norm <= 1e-10 * reference {
            break;
        }
        w /= norm;
        let t = &e * &w;
        let tt = t.norm_squared();
        if tt == 0.0 {
            break;
        }
        let load = e.tr_mul(&t) / tt;
        let q = f.dot(&t) / tt;
        e -= &t * load.transpose();
        f -= &t * q;
        ws.push(w);
        ps.push(load);
        qs.push(q);
    }
    let coef = if ws.is_empty() {
        DVector::zeros(p)
    } else {
        let w = DMatrix::from_columns(&ws);
        let pm = DMatrix::from_columns(&ps);
        let q = DVector::from_vec(qs);
        // P'W is upper triangular with unit diagonal, so always invertible.
        let ptw = pm.tr_mul(&w);
        let r = ptw.lu().solve(&q).unwrap_or_else(|| DVector::zeros(ws.len()));
        w * r
    };
    let (intercept, coef) = linear(&means, y_mean, coef);
    Params::Linear { intercept, coef }
}
