// SPDX-License-Identifier: Apache-2.0

//! Deterministic cost oracle: an ASIC proxy computed directly on the gate
//! netlist and an FPGA estimate computed on its k-LUT mapping.

mod activity;
mod lutmap;
mod measurement;

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

pub use activity::{activity, exhaustive_activity, propagated_activity, Activity, EXACT_ACTIVITY_LIMIT};
pub use lutmap::{lut_map, Lut, LutNetwork};
pub use measurement::{
    load_measurements, measure, measure_sampled, read_measurements, write_measurements, Measurement,
    MEASUREMENT_COLUMNS,
};

use crate::circuit::{GateType, Netlist, Signal};
use crate::error::{Error, Result};

pub const DEFAULT_LUT_K: usize = 6;

/// Timing, power and cell tables of the oracle. Partial JSON overrides are
/// completed from the defaults.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct OracleConfig {
    pub t_lut: f64,
    pub t_route: f64,
    pub p_static: f64,
    pub c_dyn: f64,
    pub area_table: BTreeMap<GateType, f64>,
    pub delay_table: BTreeMap<GateType, f64>,
}

impl Default for OracleConfig {
    fn default() -> Self {
        use GateType::*;
        let area_table = [
            (Not, 0.5),
            (Buf, 0.25),
            (And, 1.5),
            (Or, 1.5),
            (Nand, 1.0),
            (Nor, 1.0),
            (Xor, 2.5),
            (Xnor, 2.5),
            (Const0, 0.0),
            (Const1, 0.0),
        ];
        let delay_table = [
            (Not, 0.5),
            (Buf, 0.5),
            (Nand, 1.0),
            (Nor, 1.0),
            (And, 1.2),
            (Or, 1.2),
            (Xor, 1.8),
            (Xnor, 1.8),
            (Const0, 0.0),
            (Const1, 0.0),
        ];
        OracleConfig {
            t_lut: 0.5,
            t_route: 0.6,
            p_static: 1.0,
            c_dyn: 0.2,
            area_table: area_table.into_iter().collect(),
            delay_table: delay_table.into_iter().collect(),
        }
    }
}

impl OracleConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let mut cfg: OracleConfig = serde_json::from_str(text)?;
        let defaults = OracleConfig::default();
        for (g, v) in defaults.area_table {
            cfg.area_table.entry(g).or_insert(v);
        }
        for (g, v) in defaults.delay_table {
            cfg.delay_table.entry(g).or_insert(v);
        }
        let scalars = [cfg.t_lut, cfg.t_route, cfg.p_static, cfg.c_dyn];
        let tables = cfg.area_table.values().chain(cfg.delay_table.values());
        if scalars.iter().chain(tables).any(|v| !v.is_finite() || *v < 0.0) {
            return Err(Error::Config("oracle constants must be finite and non-negative".into()));
        }
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text)
    }

    fn area(&self, g: GateType) -> f64 {
        self.area_table.get(&g).copied().unwrap_or(0.0)
    }

    fn delay(&self, g: GateType) -> f64 {
        self.delay_table.get(&g).copied().unwrap_or(0.0)
    }
}

/// Technology-independent cost proxy of the gate netlist.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct AsicCost {
    pub area_units: f64,
    pub delay_units: f64,
    pub power_units: f64,
}

/// FPGA cost estimate of a mapped LUT network.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FpgaCost {
    pub luts: u64,
    pub latency_ns: f64,
    pub power_mw: f64,
}

pub fn asic_cost(netlist: &Netlist, config: &OracleConfig) -> AsicCost {
    asic_cost_with_activity(netlist, &activity(netlist), config)
}

pub fn asic_cost_with_activity(netlist: &Netlist, act: &Activity, config: &OracleConfig) -> AsicCost {
    let n_in = netlist.n_inputs();
    let mut arrival = vec![0.0f64; netlist.net_count()];
    let mut area = 0.0;
    let mut power = 0.0;
    for (i, g) in netlist.gates().iter().enumerate() {
        let a = config.area(g.kind);
        area += a;
        power += a * act.toggle(n_in + i).unwrap_or(0.0);
        let latest = g
            .fanin
            .iter()
            .filter_map(|s| s.net())
            .map(|n| arrival[n.0])
            .fold(0.0, f64::max);
        arrival[n_in + i] = latest + config.delay(g.kind);
    }
    let delay = netlist
        .outputs()
        .iter()
        .filter_map(|s| match s {
            Signal::Net(n) => Some(arrival[n.0]),
            Signal::Const(_) => None,
        })
        .fold(0.0, f64::max);
    AsicCost {
        area_units: area,
        delay_units: delay,
        power_units: power,
    }
}

/// LUT count, depth-derived latency and activity-derived power.
pub fn fpga_cost(lutnet: &LutNetwork, act: &Activity, config: &OracleConfig) -> Result<FpgaCost> {
    let mut toggles = 0.0;
    for lut in &lutnet.luts {
        toggles += act.toggle(lut.output).ok_or(Error::MissingActivity(lut.output))?;
    }
    Ok(FpgaCost {
        luts: lutnet.lut_count() as u64,
        latency_ns: lutnet.depth as f64 * (config.t_lut + config.t_route),
        power_mw: config.p_static + config.c_dyn * toggles,
    })
}
