// SPDX-License-Identifier: Apache-2.0

//! Variance-reduction regression trees and bagged forests of them.

use nalgebra::DMatrix;
use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "node", rename_all = "snake_case")]
pub enum Node {
    Leaf {
        value: f64,
    },
    /// Rows with `x[feature] <= threshold` go left.
    Split {
        feature: usize,
        threshold: f64,
        left: usize,
        right: usize,
    },
}

#[derive(Clone, Copy, Debug)]
pub(crate) struct TreeConfig {
    pub max_depth: usize,
    pub min_leaf: usize,
    pub max_features: usize,
}

/// Node arena with the root at index 0.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Tree {
    pub nodes: Vec<Node>,
}

struct Builder<'a> {
    x: &'a DMatrix<f64>,
    y: &'a [f64],
    cfg: TreeConfig,
    rng: Option<ChaCha8Rng>,
    nodes: Vec<Node>,
}

struct Best {
    sse: f64,
    feature: usize,
    threshold: f64,
    cut: usize,
}

impl Builder<'_> {
    fn candidate_features(&mut self) -> Vec<usize> {
        let p = self.x.ncols();
        match self.rng.as_mut() {
            Some(rng) if self.cfg.max_features < p => {
                let mut f = sample(rng, p, self.cfg.max_features).into_vec();
                f.sort_unstable();
                f
            }
            _ => (0..p).collect(),
        }
    }

    fn build(&mut self, rows: &mut [usize], depth: usize) -> usize {
        let id = self.nodes.len();
        let n = rows.len() as f64;
        let mean = rows.iter().map(|&r| self.y[r]).sum::<f64>() / n;
        self.nodes.push(Node::Leaf { value: mean });
        let first = self.y[rows[0]];
        if depth >= self.cfg.max_depth || rows.len() < 2 * self.cfg.min_leaf || rows.iter().all(|&r| self.y[r] == first)
        {
            return id;
        }
        let Some(best) = self.best_split(rows, mean) else {
            return id;
        };
        let x = self.x;
        rows.sort_by(|&a, &b| x[(a, best.feature)].total_cmp(&x[(b, best.feature)]).then(a.cmp(&b)));
        let (l, r) = rows.split_at_mut(best.cut);
        let left = self.build(l, depth + 1);
        let right = self.build(r, depth + 1);
        self.nodes[id] = Node::Split {
            feature: best.feature,
            threshold: best.threshold,
            left,
            right,
        };
        id
    }

    /// Lowest summed child SSE over candidate features and cut points; first
    /// found wins ties. Targets are centered on the node mean for accuracy.
    fn best_split(&mut self, rows: &[usize], mean: f64) -> Option<Best> {
        let n = rows.len();
        let min_leaf = self.cfg.min_leaf;
        let dev: Vec<f64> = rows.iter().map(|&r| self.y[r] - mean).collect();
        let total: f64 = dev.iter().sum();
        let total_sq: f64 = dev.iter().map(|d| d * d).sum();
        let parent = total_sq - total * total / n as f64;
        let raw_sq: f64 = rows.iter().map(|&r| self.y[r] * self.y[r]).sum();
        let mut best: Option<Best> = None;
        let mut order: Vec<usize> = (0..n).collect();
        for f in self.candidate_features() {
            let col = |i: usize| self.x[(rows[i], f)];
            order.sort_by(|&a, &b| col(a).total_cmp(&col(b)).then(rows[a].cmp(&rows[b])));
            let (mut s, mut sq) = (0.0, 0.0);
            for (pos, &i) in order.iter().enumerate().take(n - 1) {
                s += dev[i];
                sq += dev[i] * dev[i];
                let cut = pos + 1;
                if cut < min_leaf || n - cut < min_leaf {
                    continue;
                }
                let (lo, hi) = (col(i), col(order[pos + 1]));
                if lo >= hi {
                    continue;
                }
                let (rs, rsq) = (total - s, total_sq - sq);
                let sse = (sq - s * s / cut as f64) + (rsq - rs * rs / (n - cut) as f64);
                if best.as_ref().is_none_or(|b| sse < b.sse) {
                    best = Some(Best {
                        sse,
                        feature: f,
                        threshold: 0.5 * (lo + hi),
                        cut,
                    });
                }
            }
        }
        best.filter(|b| parent - b.sse > 1e-12 * raw_sq.max(f64::MIN_POSITIVE))
    }
}

impl Tree {
    pub(crate) fn fit(x: &DMatrix<f64>, y: &[f64], cfg: &TreeConfig, rng: Option<ChaCha8Rng>) -> Tree {
        let mut rows: Vec<usize> = (0..y.len()).collect();
        Self::fit_rows(x, y, cfg, rng, &mut rows)
    }

    fn fit_rows(x: &DMatrix<f64>, y: &[f64], cfg: &TreeConfig, rng: Option<ChaCha8Rng>, rows: &mut [usize]) -> Tree {
        let mut b = Builder {
            x,
            y,
            cfg: *cfg,
            rng,
            nodes: Vec::new(),
        };
        b.build(rows, 0);
        Tree { nodes: b.nodes }
    }

    pub fn predict(&self, z: &[f64]) -> f64 {
        let mut at = 0;
        loop {
            match &self.nodes[at] {
                Node::Leaf { value } => return *value,
                Node::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => at = if z[*feature] <= *threshold { *left } else { *right },
            }
        }
    }

    pub fn depth(&self) -> usize {
        fn walk(t: &Tree, at: usize) -> usize {
            match &t.nodes[at] {
                Node::Leaf { .. } => 0,
                Node::Split { left, right, .. } => 1 + walk(t, *left).max(walk(t, *right)),
            }
        }
        walk(self, 0)
    }
}

/// Each tree draws from its own ChaCha stream, so the result does not depend
/// on how the fits are scheduled.
pub(crate) fn forest(
    x: &DMatrix<f64>,
    y: &[f64],
    cfg: &TreeConfig,
    n_trees: usize,
    bootstrap: bool,
    seed: u64,
) -> Vec<Tree> {
    (0..n_trees)
        .into_par_iter()
        .map(|t| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(t as u64);
            let n = y.len();
            let mut rows: Vec<usize> = if bootstrap {
                (0..n).map(|_| rng.gen_range(0..n)).collect()
            } else {
                (0..n).collect()
            };
            Tree::fit_rows(x, y, cfg, Some(rng), &mut rows)
        })
        .collect()
}
