// SPDX-License-Identifier: Apache-2.0

use super::{Front, Point};
use crate::error::{Error, Result};

/// Area dominated by a 2-D front and bounded by `reference`.
pub fn hypervolume2d(front: &Front, reference: &Point) -> Result<f64> {
    if reference.objectives.len() != 2 {
        return Err(Error::Dimension {
            expected: 2,
            found: reference.objectives.len(),
        });
    }
    let (rx, ry) = (reference.objectives[0], reference.objectives[1]);
    let mut pts: Vec<(f64, f64)> = Vec::with_capacity(front.len());
    for p in &front.points {
        if p.objectives.len() != 2 {
            return Err(Error::Dimension {
                expected: 2,
                found: p.objectives.len(),
            });
        }
        let (x, y) = (p.objectives[0], p.objectives[1]);
        if x > rx || y > ry {
            return Err(Error::BeyondReference(p.id.clone()));
        }
        pts.push((x, y));
    }
    pts.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1)));
    let mut volume = 0.0;
    let mut best_y = ry;
    for (i, &(x, y)) in pts.iter().enumerate() {
        best_y = best_y.min(y);
        let next_x = pts.get(i + 1).map_or(rx, |p| p.0);
        volume += (next_x - x) * (ry - best_y);
    }
    Ok(volume)
}
