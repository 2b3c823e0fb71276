// SPDX-License-Identifier: Apache-2.0

//! Greedy k-feasible cone covering of a gate netlist into k-input LUTs.

use std::collections::{BTreeSet, HashSet, VecDeque};

use serde::{Deserialize, Serialize};

use crate::circuit::{Combinational, GateType, NetId, Netlist, Signal};
use crate::error::{Error, Result};

/// One k-input lookup table. `truth` bit `m` is the output for leaf minterm `m`,
/// where leaf `i` contributes bit `i` of `m`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Lut {
    pub output: usize,
    pub fanin: Vec<usize>,
    pub truth: u64,
}

/// A mapped LUT network. Net indices refer to the source netlist.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LutNetwork {
    pub k: usize,
    pub n_inputs: usize,
    n_nets: usize,
    /// Topologically ordered (ascending output net).
    pub luts: Vec<Lut>,
    outputs: Vec<OutputRef>,
    pub depth: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
enum OutputRef {
    Net(usize),
    Const(bool),
}

impl LutNetwork {
    pub fn lut_count(&self) -> usize {
        self.luts.len()
    }

    /// LUT level of each LUT (1 for LUTs fed only by primary inputs).
    pub fn levels(&self) -> Vec<usize> {
        let mut level_of = vec![0usize; self.n_nets];
        self.luts
            .iter()
            .map(|l| {
                let lv = 1 + l.fanin.iter().map(|&f| level_of[f]).max().unwrap_or(0);
                level_of[l.output] = lv;
                lv
            })
            .collect()
    }
}

impl Combinational for LutNetwork {
    fn input_bits(&self) -> usize {
        self.n_inputs
    }

    fn output_bits(&self) -> usize {
        self.outputs.len()
    }

    fn eval_block(&self, inputs: &[u64], outputs: &mut Vec<u64>) {
        let mut nets = vec![0u64; self.n_nets];
        nets[..self.n_inputs].copy_from_slice(inputs);
        let mut scratch = [0u64; 64];
        for lut in &self.luts {
            nets[lut.output] = eval_lut(lut, &nets, &mut scratch);
        }
        outputs.clear();
        outputs.extend(self.outputs.iter().map(|o| match *o {
            OutputRef::Net(n) => nets[n],
            OutputRef::Const(true) => !0,
            OutputRef::Const(false) => 0,
        }));
    }
}

/// Evaluates a LUT over 64 lanes by folding its truth table one leaf at a time.
fn eval_lut(lut: &Lut, nets: &[u64], scratch: &mut [u64; 64]) -> u64 {
    let n = lut.fanin.len();
    let size = 1usize << n;
    for (m, s) in scratch.iter_mut().enumerate().take(size) {
        *s = if lut.truth >> m & 1 == 1 { !0 } else { 0 };
    }
    let mut width = size;
    for &leaf in &lut.fanin {
        let x = nets[leaf];
        width /= 2;
        for j in 0..width {
            scratch[j] = (x & scratch[2 * j + 1]) | (!x & scratch[2 * j]);
        }
    }
    scratch[0]
}

struct Mapper<'a> {
    netlist: &'a Netlist,
    k: usize,
}

impl Mapper<'_> {
    fn gate_index(&self, net: usize) -> Option<usize> {
        net.checked_sub(self.netlist.n_inputs())
    }

    fn const_value(&self, net: usize) -> Option<bool> {
        let g = self.gate_index(net)?;
        match self.netlist.gates()[g].kind {
            GateType::Const0 => Some(false),
            GateType::Const1 => Some(true),
            _ => None,
        }
    }

    /// Non-constant fan-in nets of a gate net, ascending and unique.
    fn fanin_nets(&self, net: usize) -> Vec<usize> {
        let Some(g) = self.gate_index(net) else {
            return Vec::new();
        };
        let set: BTreeSet<usize> = self.netlist.gates()[g]
            .fanin
            .iter()
            .filter_map(|s| s.net())
            .map(NetId::index)
            .filter(|&n| self.const_value(n).is_none())
            .collect();
        set.into_iter().collect()
    }

    /// Whole transitive cone of `root` if its primary-input support fits in `k`.
    fn full_cone(&self, root: usize) -> Option<(Vec<usize>, BTreeSet<usize>)> {
        let mut support = BTreeSet::new();
        let mut cone = Vec::new();
        let mut seen = HashSet::new();
        let mut stack = vec![root];
        while let Some(net) = stack.pop() {
            if !seen.insert(net) {
                continue;
            }
            if self.gate_index(net).is_none() {
                support.insert(net);
                if support.len() > self.k {
                    return None;
                }
            } else {
                cone.push(net);
                stack.extend(self.fanin_nets(net));
            }
        }
        Some((cone, support))
    }

    /// Breadth-first growth toward the inputs, admitting a gate iff the leaf set stays within `k`.
    fn greedy_cone(&self, root: usize) -> (Vec<usize>, BTreeSet<usize>) {
        let mut cone: HashSet<usize> = HashSet::from([root]);
        let mut order = vec![root];
        let mut leaves: BTreeSet<usize> = self.fanin_nets(root).into_iter().collect();
        let mut queue: VecDeque<usize> = leaves.iter().copied().collect();
        while let Some(g) = queue.pop_front() {
            if self.gate_index(g).is_none() || !leaves.contains(&g) {
                continue;
            }
            let fanins = self.fanin_nets(g);
            let mut candidate = leaves.clone();
            candidate.remove(&g);
            candidate.extend(fanins.iter().copied().filter(|f| !cone.contains(f)));
            if candidate.len() <= self.k {
                leaves = candidate;
                cone.insert(g);
                order.push(g);
                queue.extend(fanins);
            }
        }
        (order, leaves)
    }

    fn truth_table(&self, cone: &[usize], leaves: &[usize], root: usize) -> u64 {
        const LANE_MASKS: [u64; 6] = [
            0xAAAA_AAAA_AAAA_AAAA,
            0xCCCC_CCCC_CCCC_CCCC,
            0xF0F0_F0F0_F0F0_F0F0,
            0xFF00_FF00_FF00_FF00,
            0xFFFF_0000_FFFF_0000,
            0xFFFF_FFFF_0000_0000,
        ];
        let mut value = std::collections::HashMap::new();
        for (i, &l) in leaves.iter().enumerate() {
            value.insert(l, LANE_MASKS[i]);
        }
        let mut sorted = cone.to_vec();
        sorted.sort_unstable();
        let n_in = self.netlist.n_inputs();
        for net in sorted {
            let g = &self.netlist.gates()[net - n_in];
            let operand = |i: usize| match g.fanin.get(i) {
                Some(Signal::Net(n)) => match self.const_value(n.0) {
                    Some(c) => c as u64 * !0,
                    None => value[&n.0],
                },
                Some(Signal::Const(c)) => *c as u64 * !0,
                None => 0,
            };
            let v = g.kind.eval(operand(0), operand(1));
            value.insert(net, v);
        }
        let size = 1u32 << leaves.len();
        let mask = if size == 64 { !0 } else { (1u64 << size) - 1 };
        value[&root] & mask
    }
}

/// Maps `netlist` onto `k`-input LUTs.
///
/// Required nets are processed in first-in order starting from the declared
/// outputs. A net whose primary-input support fits in `k` becomes a single LUT;
/// otherwise its cone is grown greedily. Leaves of each cone that are gate
/// outputs become required nets in turn. Constant gates are absorbed.
pub fn lut_map(netlist: &Netlist, k: usize) -> Result<LutNetwork> {
    if !(2..=6).contains(&k) {
        return Err(Error::out_of_range("LUT size k", k));
    }
    let mapper = Mapper { netlist, k };
    let n_in = netlist.n_inputs();

    let outputs: Vec<OutputRef> = netlist
        .outputs()
        .iter()
        .map(|s| match *s {
            Signal::Const(c) => OutputRef::Const(c),
            Signal::Net(n) => match mapper.const_value(n.0) {
                Some(c) => OutputRef::Const(c),
                None => OutputRef::Net(n.0),
            },
        })
        .collect();

    let mut required: VecDeque<usize> = outputs
        .iter()
        .filter_map(|o| match o {
            OutputRef::Net(n) if *n >= n_in => Some(*n),
            _ => None,
        })
        .collect();
    let mut mapped = HashSet::new();
    let mut luts = Vec::new();
    while let Some(root) = required.pop_front() {
        if !mapped.insert(root) {
            continue;
        }
        let (cone, leaves) = mapper.full_cone(root).unwrap_or_else(|| mapper.greedy_cone(root));
        let leaves: Vec<usize> = leaves.into_iter().collect();
        let truth = mapper.truth_table(&cone, &leaves, root);
        required.extend(leaves.iter().copied().filter(|&l| l >= n_in));
        luts.push(Lut {
            output: root,
            fanin: leaves,
            truth,
        });
    }
    luts.sort_by_key(|l| l.output);

    let mut net = LutNetwork {
        k,
        n_inputs: n_in,
        n_nets: netlist.net_count(),
        luts,
        outputs,
        depth: 0,
    };
    net.depth = net.levels().into_iter().max().unwrap_or(0);
    Ok(net)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::{build_exact_adder, build_exact_multiplier, check_equivalence, parse_netlist};

    const FULL_ADDER: &str = "inputs a b c\ngate t XOR a b\ngate s XOR t c\ngate c1 AND a b\ngate c2 AND t c\ngate co OR c1 c2\noutputs s co\n";

    #[test]
    fn single_gate() {
        let n = parse_netlist("inputs a b\ngate g AND a b\noutputs g\n").unwrap();
        let m = lut_map(&n, 6).unwrap();
        assert_eq!((m.lut_count(), m.depth), (1, 1));
        assert_eq!(m.luts[0].truth, 0b1000);
    }

    #[test]
    fn full_adder_two_luts() {
        let n = parse_netlist(FULL_ADDER).unwrap();
        let m = lut_map(&n, 6).unwrap();
        assert_eq!((m.lut_count(), m.depth), (2, 1));
        assert!(check_equivalence(&m, &n).unwrap());
        // With k=2 the three-input functions need two levels.
        let m2 = lut_map(&n, 2).unwrap();
        assert!(m2.depth >= 2);
        assert!(m2.luts.iter().all(|l| l.fanin.len() <= 2));
        assert!(check_equivalence(&m2, &n).unwrap());
    }

    #[test]
    fn k_range() {
        let n = parse_netlist(FULL_ADDER).unwrap();
        assert!(lut_map(&n, 1).is_err());
        assert!(lut_map(&n, 7).is_err());
    }

    #[test]
    fn wires_and_constants() {
        let n = parse_netlist("inputs a b\ngate z CONST1\ngate g AND a z\noutputs a CONST0 z g\n").unwrap();
        let m = lut_map(&n, 4).unwrap();
        // Only g needs logic; the constant gate is absorbed into it.
        assert_eq!(m.lut_count(), 1);
        assert_eq!(m.luts[0].fanin, vec![0]);
        assert!(check_equivalence(&m, &n).unwrap());
        let wires = parse_netlist("inputs a b\noutputs b a\n").unwrap();
        let mw = lut_map(&wires, 6).unwrap();
        assert_eq!((mw.lut_count(), mw.depth), (0, 0));
    }

    #[test]
    fn reconvergent_small_support_is_one_lut() {
        // Partial cuts {x,y} -> {a,b,y} exceed k=2 but the full support is {a,b}.
        let n = parse_netlist("inputs a b\ngate x XOR a b\ngate y OR a b\ngate r AND x y\noutputs r\n").unwrap();
        let m = lut_map(&n, 2).unwrap();
        assert_eq!(m.lut_count(), 1);
        assert!(check_equivalence(&m, &n).unwrap());
    }

    #[test]
    fn arithmetic_equivalence_all_k() {
        let add = build_exact_adder(5).unwrap();
        let mul = build_exact_multiplier(5).unwrap();
        for k in 2..=6 {
            for n in [&add, &mul] {
                let m = lut_map(n, k).unwrap();
                assert!(m.luts.iter().all(|l| l.fanin.len() <= k));
                assert!(check_equivalence(&m, n).unwrap(), "k={k} {}", n.name());
            }
        }
    }

    #[test]
    fn deterministic() {
        let mul = build_exact_multiplier(6).unwrap();
        assert_eq!(lut_map(&mul, 6).unwrap(), lut_map(&mul, 6).unwrap());
    }
}
