// SPDX-License-Identifier: Apache-2.0

use nalgebra::{DMatrix, DVector};

use super::model::Params;

pub(crate) fn fit(x: &DMatrix<f64>, y: &DVector<f64>, k: usize, weighted: bool) -> Params {
    Params::Neighbors {
        k: k.min(x.nrows()),
        weighted,
        points: x.row_iter().map(|r| r.iter().copied().collect()).collect(),
        targets: y.as_slice().to_vec(),
    }
}

/// Mean target of the `k` nearest stored points; distance ties go to the lower index.
pub(crate) fn predict(k: usize, weighted: bool, points: &[Vec<f64>], targets: &[f64], z: &[f64]) -> f64 {
    let mut dist: Vec<(f64, usize)> = points
        .iter()
        .enumerate()
        .map(|(i, p)| (p.iter().zip(z).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt(), i))
        .collect();
    dist.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    let near = &dist[..k.min(dist.len())];
    if weighted {
        let exact: Vec<f64> = near
            .iter()
            .filter(|(d, _)| *d == 0.0)
            .map(|(_, i)| targets[*i])
            .collect();
        if !exact.is_empty() {
            return exact.iter().sum::<f64>() / exact.len() as f64;
        }
        let (num, den) = near
            .iter()
            .fold((0.0, 0.0), |(n, d), (dist, i)| (n + targets[*i] / dist, d + 1.0 / dist));
        num / den
    } else {
        near.iter().map(|(_, i)| targets[*i]).sum::<f64>() / near.len() as f64
    }
}
