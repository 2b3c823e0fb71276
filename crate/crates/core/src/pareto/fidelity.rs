// SPDX-License-Identifier: Apache-2.0

use std::cmp::Ordering;
use std::collections::HashMap;

use rayon::prelude::*;

use crate::error::{Error, Result};

/// Relative tolerance under which two values compare equal.
pub const DEFAULT_FIDELITY_EPS: f64 = 1e-9;

/// `<`, `>` or `=` between two values, with `=` when within relative `eps`.
pub fn relation(a: f64, b: f64, eps: f64) -> Ordering {
    if a == b || (a - b).abs() <= eps * a.abs().max(b.abs()) {
        Ordering::Equal
    } else if a < b {
        Ordering::Less
    } else {
        Ordering::Greater
    }
}

/// Fraction of ordered pairs `(x1, x2)` whose estimated relation matches the
/// measured one. Self-pairs are included, so the result is at least `1/|X|`.
pub fn fidelity_values(est: &[f64], mes: &[f64], eps: f64) -> Result<f64> {
    if est.len() != mes.len() {
        return Err(Error::Dimension {
            expected: est.len(),
            found: mes.len(),
        });
    }
    let n = est.len();
    if n == 0 {
        return Err(Error::Empty("fidelity set"));
    }
    // The relation is antisymmetric, so each unordered pair counts twice.
    let agreeing: u64 = (0..n)
        .into_par_iter()
        .map(|i| {
            ((i + 1)..n)
                .filter(|&j| relation(est[i], est[j], eps) == relation(mes[i], mes[j], eps))
                .count() as u64
        })
        .sum();
    let total = n as u64 * n as u64;
    Ok((2 * agreeing + n as u64) as f64 / total as f64)
}

/// Fidelity over id-keyed estimates and measurements; the id sets must match.
pub fn fidelity(est: &HashMap<String, f64>, mes: &HashMap<String, f64>, eps: f64) -> Result<f64> {
    if est.len() != mes.len() || est.keys().any(|k| !mes.contains_key(k)) {
        return Err(Error::IdMismatch(format!(
            "{} estimated vs {} measured ids",
            est.len(),
            mes.len()
        )));
    }
    let mut ids: Vec<&String> = est.keys().collect();
    ids.sort();
    let e: Vec<f64> = ids.iter().map(|k| est[*k]).collect();
    let m: Vec<f64> = ids.iter().map(|k| mes[*k]).collect();
    fidelity_values(&e, &m, eps)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn map(v: &[(&str, f64)]) -> HashMap<String, f64> {
        v.iter().map(|(k, x)| (k.to_string(), *x)).collect()
    }

    #[test]
    fn identical_is_one() {
        let m = map(&[("a", 1.0), ("b", 3.0), ("c", 3.0)]);
        assert_eq!(fidelity(&m, &m, DEFAULT_FIDELITY_EPS).unwrap(), 1.0);
    }

    #[test]
    fn reversed_pair_is_half() {
        let est = map(&[("x1", 1.0), ("x2", 2.0)]);
        let mes = map(&[("x1", 5.0), ("x2", 3.0)]);
        assert_eq!(fidelity(&est, &mes, DEFAULT_FIDELITY_EPS).unwrap(), 0.5);
    }

    #[test]
    fn monotone_transform_is_one() {
        let mes: Vec<f64> = (0..30).map(|i| i as f64 * 0.7).collect();
        let est: Vec<f64> = mes.iter().map(|v| (v + 1.0).ln() * 3.0 - 2.0).collect();
        assert_eq!(fidelity_values(&est, &mes, 1e-9).unwrap(), 1.0);
    }

    #[test]
    fn ties_must_be_matched() {
        // mes ties, est does not: the cross pairs disagree.
        assert_eq!(fidelity_values(&[1.0, 2.0], &[4.0, 4.0], 1e-9).unwrap(), 0.5);
        // within eps counts as equal
        assert_eq!(fidelity_values(&[1.0, 1.0 + 1e-12], &[4.0, 4.0], 1e-9).unwrap(), 1.0);
    }

    #[test]
    fn mismatched_ids() {
        let a = map(&[("a", 1.0)]);
        let b = map(&[("b", 1.0)]);
        assert!(matches!(fidelity(&a, &b, 1e-9), Err(Error::IdMismatch(_))));
        assert!(fidelity_values(&[], &[], 1e-9).is_err());
    }
}
