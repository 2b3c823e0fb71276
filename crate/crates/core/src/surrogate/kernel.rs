// SPDX-License-Identifier: Apache-2.0

//! Kernel ridge regression with a Gaussian (RBF) kernel.

use nalgebra::{DMatrix, DVector};

use super::model::Params;
use crate::error::{Error, Result};

fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

fn rbf(bandwidth: f64, d2: f64) -> f64 {
    (-d2 / (2.0 * bandwidth * bandwidth)).exp()
}

fn rows(x: &DMatrix<f64>) -> Vec<Vec<f64>> {
    x.row_iter().map(|r| r.iter().copied().collect()).collect()
}

/// Median pairwise Euclidean distance between rows, falling back to the mean
/// positive distance and then to 1 when most rows coincide.
pub(crate) fn median_distance(x: &DMatrix<f64>) -> f64 {
    let pts = rows(x);
    let mut d: Vec<f64> = Vec::with_capacity(pts.len() * pts.len().saturating_sub(1) / 2);
    for i in 0..pts.len() {
        for j in (i + 1)..pts.len() {
            d.push(sq_dist(&pts[i], &pts[j]).sqrt());
        }
    }
    if d.is_empty() {
        return 1.0;
    }
    d.sort_by(f64::total_cmp);
    let mid = d.len() / 2;
    let median = if d.len() % 2 == 1 {
        d[mid]
    } else {
        0.5 * (d[mid - 1] + d[mid])
    };
    if median > 0.0 {
        return median;
    }
    let positive: Vec<f64> = d.into_iter().filter(|v| *v > 0.0).collect();
    if positive.is_empty() {
        1.0
    } else {
        positive.iter().sum::<f64>() / positive.len() as f64
    }
}

pub(crate) fn fit(x: &DMatrix<f64>, y: &DVector<f64>, alpha: f64, bandwidth: f64) -> Result<Params> {
    let support = rows(x);
    let n = support.len();
    let y_mean = y.mean();
    let yc = y.add_scalar(-y_mean);
    let gram = DMatrix::from_fn(n, n, |i, j| {
        let k = rbf(bandwidth, sq_dist(&support[i], &support[j]));
        if i == j {
            k + alpha
        } else {
            k
        }
    });
    let chol = gram
        .cholesky()
        .ok_or_else(|| Error::Singular("kernel matrix is not positive definite; raise the penalty".into()))?;
    let dual = chol.solve(&yc);
    Ok(Params::Kernel {
        intercept: y_mean,
        bandwidth,
        dual: dual.as_slice().to_vec(),
        support,
    })
}

pub(crate) fn evaluate(bandwidth: f64, dual: &[f64], support: &[Vec<f64>], z: &[f64]) -> f64 {
    dual.iter()
        .zip(support)
        .map(|(c, s)| c * rbf(bandwidth, sq_dist(s, z)))
        .sum()
}
