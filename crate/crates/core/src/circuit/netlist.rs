// SPDX-License-Identifier: Apache-2.0

use std::collections::HashSet;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Primitive cell of a gate-level netlist.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum GateType {
    Not,
    Buf,
    And,
    Or,
    Xor,
    Nand,
    Nor,
    Xnor,
    Const0,
    Const1,
}

impl GateType {
    pub const ALL: [GateType; 10] = [
        GateType::Not,
        GateType::Buf,
        GateType::And,
        GateType::Or,
        GateType::Xor,
        GateType::Nand,
        GateType::Nor,
        GateType::Xnor,
        GateType::Const0,
        GateType::Const1,
    ];

    /// The eight non-constant cells, in feature-schema order.
    pub const LOGIC: [GateType; 8] = [
        GateType::Not,
        GateType::Buf,
        GateType::And,
        GateType::Or,
        GateType::Xor,
        GateType::Nand,
        GateType::Nor,
        GateType::Xnor,
    ];

    pub fn arity(self) -> usize {
        match self {
            GateType::Const0 | GateType::Const1 => 0,
            GateType::Not | GateType::Buf => 1,
            _ => 2,
        }
    }

    pub fn is_const(self) -> bool {
        matches!(self, GateType::Const0 | GateType::Const1)
    }

    pub fn name(self) -> &'static str {
        match self {
            GateType::Not => "NOT",
            GateType::Buf => "BUF",
            GateType::And => "AND",
            GateType::Or => "OR",
            GateType::Xor => "XOR",
            GateType::Nand => "NAND",
            GateType::Nor => "NOR",
            GateType::Xnor => "XNOR",
            GateType::Const0 => "CONST0",
            GateType::Const1 => "CONST1",
        }
    }

    /// Bitwise evaluation over 64 parallel patterns. Unused operands are ignored.
    #[inline]
    pub fn eval(self, a: u64, b: u64) -> u64 {
        match self {
            GateType::Not => !a,
            GateType::Buf => a,
            GateType::And => a & b,
            GateType::Or => a | b,
            GateType::Xor => a ^ b,
            GateType::Nand => !(a & b),
            GateType::Nor => !(a | b),
            GateType::Xnor => !(a ^ b),
            GateType::Const0 => 0,
            GateType::Const1 => !0,
        }
    }

    /// Output one-probability assuming independent inputs.
    pub fn propagate_probability(self, a: f64, b: f64) -> f64 {
        match self {
            GateType::Not => 1.0 - a,
            GateType::Buf => a,
            GateType::And => a * b,
            GateType::Or => 1.0 - (1.0 - a) * (1.0 - b),
            GateType::Xor => a * (1.0 - b) + b * (1.0 - a),
            GateType::Nand => 1.0 - a * b,
            GateType::Nor => (1.0 - a) * (1.0 - b),
            GateType::Xnor => 1.0 - (a * (1.0 - b) + b * (1.0 - a)),
            GateType::Const0 => 0.0,
            GateType::Const1 => 1.0,
        }
    }
}

impl fmt::Display for GateType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for GateType {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        GateType::ALL
            .iter()
            .copied()
            .find(|g| g.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| format!("unknown gate type `{s}`"))
    }
}

/// Index of a net: primary inputs occupy `0..n_inputs`, gate `i` drives net `n_inputs + i`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct NetId(pub usize);

impl NetId {
    #[inline]
    pub fn index(self) -> usize {
        self.0
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Signal {
    Net(NetId),
    Const(bool),
}

impl Signal {
    pub fn net(self) -> Option<NetId> {
        match self {
            Signal::Net(n) => Some(n),
            Signal::Const(_) => None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Gate {
    pub name: String,
    pub kind: GateType,
    pub fanin: Vec<Signal>,
}

/// An acyclic combinational circuit with LSB-first input and output buses.
///
/// Gates are stored in topological order, so every fan-in of gate `i` is a
/// primary input, a constant, or a net driven by a gate with index `< i`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Netlist {
    name: String,
    inputs: Vec<String>,
    gates: Vec<Gate>,
    outputs: Vec<Signal>,
}

const RESERVED: [&str; 2] = ["CONST0", "CONST1"];

impl Netlist {
    /// Builds a netlist from gates already in topological order.
    pub fn new(name: impl Into<String>, inputs: Vec<String>, gates: Vec<Gate>, outputs: Vec<Signal>) -> Result<Self> {
        let netlist = Netlist {
            name: name.into(),
            inputs,
            gates,
            outputs,
        };
        netlist.validate()?;
        Ok(netlist)
    }

    fn validate(&self) -> Result<()> {
        if self.inputs.is_empty() {
            return Err(Error::InvalidNetlist("no inputs declared".into()));
        }
        if self.outputs.is_empty() {
            return Err(Error::InvalidNetlist("no outputs declared".into()));
        }
        if self.inputs.len() > 64 {
            return Err(Error::InvalidNetlist(format!(
                "{} inputs exceed the 64-bit word limit",
                self.inputs.len()
            )));
        }
        if self.outputs.len() > 64 {
            return Err(Error::InvalidNetlist(format!(
                "{} outputs exceed the 64-bit word limit",
                self.outputs.len()
            )));
        }
        let mut seen = HashSet::new();
        for id in self.inputs.iter().chain(self.gates.iter().map(|g| &g.name)) {
            if RESERVED.contains(&id.as_str()) || !is_identifier(id) {
                return Err(Error::InvalidNetlist(format!("invalid identifier `{id}`")));
            }
            if !seen.insert(id.as_str()) {
                return Err(Error::DuplicateId(id.clone()));
            }
        }
        let n_in = self.inputs.len();
        for (i, gate) in self.gates.iter().enumerate() {
            if gate.fanin.len() != gate.kind.arity() {
                return Err(Error::Arity {
                    gate: gate.name.clone(),
                    kind: gate.kind.name().into(),
                    expected: gate.kind.arity(),
                    found: gate.fanin.len(),
                });
            }
            for s in &gate.fanin {
                if let Signal::Net(n) = s {
                    if n.0 >= n_in + i {
                        return Err(Error::InvalidNetlist(format!(
                            "gate `{}` references net {} that is not defined before it",
                            gate.name, n.0
                        )));
                    }
                }
            }
        }
        let n_nets = self.net_count();
        for s in &self.outputs {
            if let Signal::Net(n) = s {
                if n.0 >= n_nets {
                    return Err(Error::InvalidNetlist(format!("output references net {}", n.0)));
                }
            }
        }
        Ok(())
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn set_name(&mut self, name: impl Into<String>) {
        self.name = name.into();
    }

    pub fn inputs(&self) -> &[String] {
        &self.inputs
    }

    pub fn gates(&self) -> &[Gate] {
        &self.gates
    }

    pub fn outputs(&self) -> &[Signal] {
        &self.outputs
    }

    pub fn n_inputs(&self) -> usize {
        self.inputs.len()
    }

    pub fn n_outputs(&self) -> usize {
        self.outputs.len()
    }

    pub fn net_count(&self) -> usize {
        self.inputs.len() + self.gates.len()
    }

    /// The gate driving `net`, or `None` for a primary input.
    pub fn driver(&self, net: NetId) -> Option<&Gate> {
        net.0.checked_sub(self.inputs.len()).and_then(|i| self.gates.get(i))
    }

    pub fn net_name(&self, net: NetId) -> &str {
        match self.driver(net) {
            Some(g) => &g.name,
            None => &self.inputs[net.0],
        }
    }

    pub fn gate_net(&self, gate_index: usize) -> NetId {
        NetId(self.inputs.len() + gate_index)
    }

    /// Gates whose output reaches at least one primary output.
    pub fn live_gates(&self) -> Vec<bool> {
        let n_in = self.inputs.len();
        let mut live = vec![false; self.gates.len()];
        let mut stack: Vec<usize> = self
            .outputs
            .iter()
            .filter_map(|s| s.net())
            .filter(|n| n.0 >= n_in)
            .map(|n| n.0 - n_in)
            .collect();
        while let Some(g) = stack.pop() {
            if live[g] {
                continue;
            }
            live[g] = true;
            for s in &self.gates[g].fanin {
                if let Signal::Net(n) = s {
                    if n.0 >= n_in {
                        stack.push(n.0 - n_in);
                    }
                }
            }
        }
        live
    }

    /// True if at least one output structurally depends on a primary input.
    pub fn has_input_dependent_output(&self) -> bool {
        let n_in = self.inputs.len();
        let mut depends = vec![false; self.net_count()];
        depends[..n_in].iter_mut().for_each(|d| *d = true);
        for (i, g) in self.gates.iter().enumerate() {
            depends[n_in + i] = !g.kind.is_const() && g.fanin.iter().any(|s| s.net().is_some_and(|n| depends[n.0]));
        }
        self.outputs.iter().any(|s| s.net().is_some_and(|n| depends[n.0]))
    }

    /// Removes gates that do not reach any output, renumbering nets.
    pub fn sweep_dead(&self) -> Netlist {
        let live = self.live_gates();
        let n_in = self.inputs.len();
        let mut remap: Vec<usize> = (0..n_in).collect();
        let mut gates = Vec::with_capacity(self.gates.len());
        for (i, g) in self.gates.iter().enumerate() {
            if live[i] {
                remap.push(n_in + gates.len());
                gates.push(g.clone());
            } else {
                remap.push(usize::MAX);
            }
        }
        let fix = |s: &Signal| match s {
            Signal::Net(n) => Signal::Net(NetId(remap[n.0])),
            c => *c,
        };
        for g in &mut gates {
            g.fanin = g.fanin.iter().map(fix).collect();
        }
        Netlist {
            name: self.name.clone(),
            inputs: self.inputs.clone(),
            gates,
            outputs: self.outputs.iter().map(fix).collect(),
        }
    }

    pub(crate) fn gates_mut(&mut self) -> &mut [Gate] {
        &mut self.gates
    }

    pub(crate) fn outputs_mut(&mut self) -> &mut [Signal] {
        &mut self.outputs
    }

    fn signal_text(&self, s: Signal) -> &str {
        match s {
            Signal::Net(n) => self.net_name(n),
            Signal::Const(false) => "CONST0",
            Signal::Const(true) => "CONST1",
        }
    }

    /// Serializes to the line-oriented netlist text format.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        out.push_str("name ");
        out.push_str(&self.name);
        out.push('\n');
        out.push_str("inputs");
        for i in &self.inputs {
            out.push(' ');
            out.push_str(i);
        }
        out.push('\n');
        for g in &self.gates {
            out.push_str("gate ");
            out.push_str(&g.name);
            out.push(' ');
            out.push_str(g.kind.name());
            for s in &g.fanin {
                out.push(' ');
                out.push_str(self.signal_text(*s));
            }
            out.push('\n');
        }
        out.push_str("outputs");
        for s in &self.outputs {
            out.push(' ');
            out.push_str(self.signal_text(*s));
        }
        out.push('\n');
        out
    }
}

pub(crate) fn is_identifier(s: &str) -> bool {
    !s.is_empty()
        && s.chars()
            .all(|c| c.is_ascii_alphanumeric() || matches!(c, '_' | '.' | '[' | ']' | '$'))
}

/// Incremental construction of a netlist with auto-named gates.
#[derive(Debug, Default)]
pub struct NetlistBuilder {
    name: String,
    inputs: Vec<String>,
    gates: Vec<Gate>,
}

impl NetlistBuilder {
    pub fn new(name: impl Into<String>) -> Self {
        NetlistBuilder {
            name: name.into(),
            ..Default::default()
        }
    }

    pub fn input(&mut self, name: impl Into<String>) -> Signal {
        assert!(self.gates.is_empty(), "inputs must be declared before gates");
        self.inputs.push(name.into());
        Signal::Net(NetId(self.inputs.len() - 1))
    }

    /// Declares a bus `prefix0 .. prefix{width-1}`, LSB first.
    pub fn input_bus(&mut self, prefix: &str, width: usize) -> Vec<Signal> {
        (0..width).map(|i| self.input(format!("{prefix}{i}"))).collect()
    }

    pub fn gate(&mut self, kind: GateType, fanin: &[Signal]) -> Signal {
        let name = format!("g{}", self.gates.len());
        self.gates.push(Gate {
            name,
            kind,
            fanin: fanin.to_vec(),
        });
        Signal::Net(NetId(self.inputs.len() + self.gates.len() - 1))
    }

    pub fn build(self, outputs: Vec<Signal>) -> Result<Netlist> {
        Netlist::new(self.name, self.inputs, self.gates, outputs)
    }
}
