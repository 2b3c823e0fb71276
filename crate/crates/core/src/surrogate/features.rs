// SPDX-License-Identifier: Apache-2.0

use serde::{Deserialize, Serialize};

use crate::circuit::{GateType, Netlist};
use crate::cost::AsicCost;

pub const N_FEATURES: usize = 15;

/// Column names of [`FeatureVector`], in schema order.
pub const FEATURE_NAMES: [&str; N_FEATURES] = [
    "n_inputs",
    "n_outputs",
    "total_gates",
    "logic_depth",
    "count_not",
    "count_buf",
    "count_and",
    "count_or",
    "count_xor",
    "count_nand",
    "count_nor",
    "count_xnor",
    "asic_area",
    "asic_delay",
    "asic_power",
];

/// Structural counts followed by the ASIC proxy costs of one circuit.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FeatureVector(pub [f64; N_FEATURES]);

impl FeatureVector {
    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn get(&self, name: &str) -> Option<f64> {
        FEATURE_NAMES.iter().position(|n| *n == name).map(|i| self.0[i])
    }
}

/// Constant gates count toward neither `total_gates` nor depth.
pub fn featurize(netlist: &Netlist, asic: &AsicCost) -> FeatureVector {
    let n_in = netlist.n_inputs();
    let mut counts = [0usize; 8];
    let mut level = vec![0usize; netlist.net_count()];
    for (i, g) in netlist.gates().iter().enumerate() {
        if g.kind.is_const() {
            continue;
        }
        if let Some(slot) = GateType::LOGIC.iter().position(|k| *k == g.kind) {
            counts[slot] += 1;
        }
        let below = g
            .fanin
            .iter()
            .filter_map(|s| s.net())
            .map(|n| level[n.0])
            .max()
            .unwrap_or(0);
        level[n_in + i] = below + 1;
    }
    let depth = netlist
        .outputs()
        .iter()
        .filter_map(|s| s.net())
        .map(|n| level[n.0])
        .max()
        .unwrap_or(0);
    let mut v = [0.0; N_FEATURES];
    v[0] = n_in as f64;
    v[1] = netlist.n_outputs() as f64;
    v[2] = counts.iter().sum::<usize>() as f64;
    v[3] = depth as f64;
    for (slot, c) in counts.iter().enumerate() {
        v[4 + slot] = *c as f64;
    }
    v[12] = asic.area_units;
    v[13] = asic.delay_units;
    v[14] = asic.power_units;
    FeatureVector(v)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::{build_exact_multiplier, parse_netlist};
    use crate::cost::{asic_cost, OracleConfig};

    #[test]
    fn single_and_gate() {
        let n = parse_netlist("inputs a b\ngate g AND a b\noutputs g\n").unwrap();
        let c = asic_cost(&n, &OracleConfig::default());
        let f = featurize(&n, &c);
        assert_eq!(&f.0[..14], &[2., 1., 1., 1., 0., 0., 1., 0., 0., 0., 0., 0., 1.5, 1.2]);
        assert_eq!(f.get("asic_power"), Some(c.power_units));
    }

    #[test]
    fn wires_only() {
        let n = parse_netlist("inputs a b\ngate z CONST0\noutputs b z\n").unwrap();
        let f = featurize(&n, &AsicCost::default());
        assert_eq!(f.get("total_gates"), Some(0.0));
        assert_eq!(f.get("logic_depth"), Some(0.0));
    }

    #[test]
    fn multiplier_counts_sum_to_total() {
        let m = build_exact_multiplier(8).unwrap();
        let f = featurize(&m, &asic_cost(&m, &OracleConfig::default()));
        let recount = m.gates().iter().filter(|g| !g.kind.is_const()).count() as f64;
        assert_eq!(f.get("total_gates"), Some(recount));
        assert_eq!(f.0[4..12].iter().sum::<f64>(), recount);
        assert_eq!(
            f.get("count_and").unwrap() + f.get("count_xor").unwrap() + f.get("count_or").unwrap(),
            recount
        );
        assert!(f.0.iter().all(|v| v.is_finite()));
    }
}
