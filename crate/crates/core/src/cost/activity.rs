// SPDX-License-Identifier: Apache-2.0

use rayon::prelude::*;

use crate::circuit::{exhaustive_block_inputs, exhaustive_layout, Netlist, Signal};

/// Largest input width for which signal probabilities are counted exhaustively.
pub const EXACT_ACTIVITY_LIMIT: usize = 20;

/// Per-net signal statistics, indexed like [`crate::circuit::NetId`].
#[derive(Clone, Debug, PartialEq)]
pub struct Activity {
    one_probability: Vec<f64>,
    exact: bool,
}

impl Activity {
    pub fn probability(&self, net: usize) -> Option<f64> {
        self.one_probability.get(net).copied()
    }

    /// Toggle probability `2 p (1 - p)` under temporally independent inputs.
    pub fn toggle(&self, net: usize) -> Option<f64> {
        self.probability(net).map(|p| 2.0 * p * (1.0 - p))
    }

    pub fn len(&self) -> usize {
        self.one_probability.len()
    }

    pub fn is_empty(&self) -> bool {
        self.one_probability.is_empty()
    }

    /// Whether probabilities came from exhaustive simulation.
    pub fn is_exact(&self) -> bool {
        self.exact
    }

    pub fn from_probabilities(one_probability: Vec<f64>) -> Self {
        Activity {
            one_probability,
            exact: false,
        }
    }
}

/// Signal and toggle probabilities for every net under uniform random inputs.
pub fn activity(netlist: &Netlist) -> Activity {
    if netlist.n_inputs() <= EXACT_ACTIVITY_LIMIT {
        exhaustive_activity(netlist)
    } else {
        propagated_activity(netlist)
    }
}

pub fn exhaustive_activity(netlist: &Netlist) -> Activity {
    let bits = netlist.n_inputs();
    let (blocks, mask) = exhaustive_layout(bits);
    let n_nets = netlist.net_count();
    let counts = (0..blocks)
        .into_par_iter()
        .fold(
            || (vec![0u64; n_nets], Vec::new(), Vec::new()),
            |(mut counts, mut inputs, mut nets), blk| {
                exhaustive_block_inputs(bits, blk, &mut inputs);
                netlist.eval_nets(&inputs, &mut nets);
                for (c, v) in counts.iter_mut().zip(&nets) {
                    *c += (v & mask).count_ones() as u64;
                }
                (counts, inputs, nets)
            },
        )
        .map(|(c, ..)| c)
        .reduce(
            || vec![0u64; n_nets],
            |mut a, b| {
                a.iter_mut().zip(b).for_each(|(x, y)| *x += y);
                a
            },
        );
    let total = (1u64 << bits) as f64;
    Activity {
        one_probability: counts.into_iter().map(|c| c as f64 / total).collect(),
        exact: true,
    }
}

/// Probabilities propagated gate by gate assuming independent fan-ins.
pub fn propagated_activity(netlist: &Netlist) -> Activity {
    let mut p = vec![0.5; netlist.n_inputs()];
    for g in netlist.gates() {
        let value = |i: usize| match g.fanin.get(i) {
            Some(Signal::Net(n)) => p[n.0],
            Some(Signal::Const(true)) => 1.0,
            _ => 0.0,
        };
        let v = g.kind.propagate_probability(value(0), value(1));
        p.push(v);
    }
    Activity {
        one_probability: p,
        exact: false,
    }
}
