// SPDX-License-Identifier: Apache-2.0

//! Dominance, front peeling, fidelity, coverage and 2-D hypervolume.
//! All objectives are minimized.

mod fidelity;
mod hypervolume;

use std::cmp::Ordering;
use std::collections::HashSet;
use std::io::Write;

use serde::{Deserialize, Serialize};

pub use fidelity::{fidelity, fidelity_values, relation, DEFAULT_FIDELITY_EPS};
pub use hypervolume::hypervolume2d;

use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Point {
    pub id: String,
    pub objectives: Vec<f64>,
}

impl Point {
    pub fn new(id: impl Into<String>, objectives: Vec<f64>) -> Self {
        Point {
            id: id.into(),
            objectives,
        }
    }
}

/// A set of mutually non-dominated points, sorted by ascending objectives.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Front {
    pub level: usize,
    pub points: Vec<Point>,
}

impl Front {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn ids(&self) -> impl Iterator<Item = &str> {
        self.points.iter().map(|p| p.id.as_str())
    }
}

/// `a` is no worse in every objective and strictly better in at least one.
pub fn dominates(a: &Point, b: &Point) -> Result<bool> {
    if a.objectives.len() != b.objectives.len() {
        return Err(Error::Dimension {
            expected: a.objectives.len(),
            found: b.objectives.len(),
        });
    }
    Ok(dominates_unchecked(&a.objectives, &b.objectives))
}

#[inline]
pub(crate) fn dominates_unchecked(a: &[f64], b: &[f64]) -> bool {
    let mut strict = false;
    for (x, y) in a.iter().zip(b) {
        if x > y {
            return false;
        }
        if x < y {
            strict = true;
        }
    }
    strict
}

fn lex_order(a: &Point, b: &Point) -> Ordering {
    for (x, y) in a.objectives.iter().zip(&b.objectives) {
        match x.total_cmp(y) {
            Ordering::Equal => {}
            o => return o,
        }
    }
    a.id.cmp(&b.id)
}

fn check_points(points: &[Point]) -> Result<usize> {
    let first = points.first().ok_or(Error::Empty("point set"))?;
    let dim = first.objectives.len();
    for p in points {
        if p.objectives.len() != dim {
            return Err(Error::Dimension {
                expected: dim,
                found: p.objectives.len(),
            });
        }
        if p.objectives.iter().any(|v| !v.is_finite()) {
            return Err(Error::Data(format!("point `{}` has a non-finite objective", p.id)));
        }
    }
    Ok(dim)
}

/// Splits indices into (non-dominated, dominated). Input must be lexicographically sorted:
/// any dominator then precedes the point it dominates.
fn split_sorted(sorted: &[&Point]) -> (Vec<usize>, Vec<usize>) {
    let mut front: Vec<usize> = Vec::new();
    let mut rest = Vec::new();
    for (i, p) in sorted.iter().enumerate() {
        if front
            .iter()
            .any(|&f| dominates_unchecked(&sorted[f].objectives, &p.objectives))
        {
            rest.push(i);
        } else {
            front.push(i);
        }
    }
    (front, rest)
}

/// The non-dominated subset; identical objective vectors are all kept.
pub fn pareto_front(points: &[Point]) -> Result<Front> {
    check_points(points)?;
    let mut sorted: Vec<&Point> = points.iter().collect();
    sorted.sort_by(|a, b| lex_order(a, b));
    let (front, _) = split_sorted(&sorted);
    Ok(Front {
        level: 1,
        points: front.into_iter().map(|i| sorted[i].clone()).collect(),
    })
}

/// Peels up to `m` successive fronts: `F1` of the whole set, `F2` of the
/// remainder, and so on until `m` fronts or the points run out.
pub fn peel_fronts(points: &[Point], m: usize) -> Result<Vec<Front>> {
    if m == 0 {
        return Err(Error::out_of_range("front count", 0));
    }
    check_points(points)?;
    let mut remaining: Vec<&Point> = points.iter().collect();
    remaining.sort_by(|a, b| lex_order(a, b));
    let mut fronts = Vec::new();
    while !remaining.is_empty() && fronts.len() < m {
        let (front, rest) = split_sorted(&remaining);
        fronts.push(Front {
            level: fronts.len() + 1,
            points: front.iter().map(|&i| remaining[i].clone()).collect(),
        });
        // Sub-sequence of a sorted list stays sorted.
        remaining = rest.into_iter().map(|i| remaining[i]).collect();
    }
    Ok(fronts)
}

/// Id-deduplicated union, keeping the first occurrence of each id.
pub fn union_fronts(fronts: &[Front]) -> Vec<Point> {
    let mut seen = HashSet::new();
    fronts
        .iter()
        .flat_map(|f| &f.points)
        .filter(|p| seen.insert(p.id.clone()))
        .cloned()
        .collect()
}

/// Fraction of `true_front` whose ids appear in `found`.
pub fn coverage<'a, I>(found: I, true_front: &Front) -> Result<f64>
where
    I: IntoIterator<Item = &'a str>,
{
    if true_front.is_empty() {
        return Err(Error::Empty("true front"));
    }
    let found: HashSet<&str> = found.into_iter().collect();
    let truth: HashSet<&str> = true_front.ids().collect();
    let hit = truth.iter().filter(|id| found.contains(*id)).count();
    Ok(hit as f64 / truth.len() as f64)
}

/// Writes fronts as `id,<objectives>,level` rows. Objectives without a name
/// in `names` are headed `objN`.
pub fn write_fronts<W: Write>(writer: W, fronts: &[Front], names: &[&str]) -> Result<()> {
    let dim = fronts
        .iter()
        .flat_map(|f| f.points.first())
        .map(|p| p.objectives.len())
        .next()
        .unwrap_or(2);
    let mut w = csv::Writer::from_writer(writer);
    let mut header = vec!["id".to_string()];
    header.extend((0..dim).map(|i| names.get(i).map_or_else(|| format!("obj{}", i + 1), |n| n.to_string())));
    header.push("level".into());
    w.write_record(&header)?;
    for f in fronts {
        for p in &f.points {
            let mut rec = vec![p.id.clone()];
            rec.extend(p.objectives.iter().map(|v| v.to_string()));
            rec.push(f.level.to_string());
            w.write_record(&rec)?;
        }
    }
    w.flush().map_err(|e| Error::io("<fronts>", e))?;
    Ok(())
}
