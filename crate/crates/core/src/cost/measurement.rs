// SPDX-License-Identifier: Apache-2.0

use std::collections::HashSet;
use std::io::{Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{activity, asic_cost_with_activity, fpga_cost, lut_map, AsicCost, FpgaCost, OracleConfig};
use crate::circuit::{error_metrics, error_metrics_sampled, ErrorReport, Netlist};
use crate::error::{Error, Result};

/// Ground-truth record of one library circuit.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Measurement {
    pub circuit_id: String,
    pub error: ErrorReport,
    pub asic: AsicCost,
    pub fpga: FpgaCost,
}

/// Runs the full oracle: exhaustive error metrics, ASIC proxy and k-LUT FPGA cost.
pub fn measure(netlist: &Netlist, exact_ref: &Netlist, k: usize, config: &OracleConfig) -> Result<Measurement> {
    let error = error_metrics(netlist, exact_ref)?;
    measure_with_error(netlist, error, k, config)
}

/// As [`measure`], with error metrics estimated from `samples` random words.
/// Used for circuits wider than the exhaustive limit.
pub fn measure_sampled(
    netlist: &Netlist,
    exact_ref: &Netlist,
    k: usize,
    config: &OracleConfig,
    samples: usize,
    seed: u64,
) -> Result<Measurement> {
    let error = error_metrics_sampled(netlist, exact_ref, samples, seed)?;
    measure_with_error(netlist, error, k, config)
}

fn measure_with_error(netlist: &Netlist, error: ErrorReport, k: usize, config: &OracleConfig) -> Result<Measurement> {
    let act = activity(netlist);
    let asic = asic_cost_with_activity(netlist, &act, config);
    let lutnet = lut_map(netlist, k)?;
    let fpga = fpga_cost(&lutnet, &act, config)?;
    Ok(Measurement {
        circuit_id: netlist.name().to_string(),
        error,
        asic,
        fpga,
    })
}

pub const MEASUREMENT_COLUMNS: [&str; 11] = [
    "circuit_id",
    "med_raw",
    "med_norm_pct",
    "worst_case",
    "error_rate",
    "asic_area",
    "asic_delay",
    "asic_power",
    "fpga_luts",
    "fpga_latency_ns",
    "fpga_power_mw",
];

#[derive(Serialize, Deserialize)]
struct Row {
    circuit_id: String,
    med_raw: f64,
    med_norm_pct: f64,
    worst_case: f64,
    error_rate: f64,
    asic_area: f64,
    asic_delay: f64,
    asic_power: f64,
    fpga_luts: u64,
    fpga_latency_ns: f64,
    fpga_power_mw: f64,
}

impl From<&Measurement> for Row {
    fn from(m: &Measurement) -> Self {
        Row {
            circuit_id: m.circuit_id.clone(),
            med_raw: m.error.med_raw,
            med_norm_pct: m.error.med_norm_pct,
            worst_case: m.error.worst_case,
            error_rate: m.error.error_rate,
            asic_area: m.asic.area_units,
            asic_delay: m.asic.delay_units,
            asic_power: m.asic.power_units,
            fpga_luts: m.fpga.luts,
            fpga_latency_ns: m.fpga.latency_ns,
            fpga_power_mw: m.fpga.power_mw,
        }
    }
}

impl From<Row> for Measurement {
    fn from(r: Row) -> Self {
        Measurement {
            circuit_id: r.circuit_id,
            error: ErrorReport {
                med_raw: r.med_raw,
                med_norm_pct: r.med_norm_pct,
                worst_case: r.worst_case,
                error_rate: r.error_rate,
            },
            asic: AsicCost {
                area_units: r.asic_area,
                delay_units: r.asic_delay,
                power_units: r.asic_power,
            },
            fpga: FpgaCost {
                luts: r.fpga_luts,
                latency_ns: r.fpga_latency_ns,
                power_mw: r.fpga_power_mw,
            },
        }
    }
}

pub fn write_measurements<W: Write>(writer: W, measurements: &[Measurement]) -> Result<()> {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(writer);
    w.write_record(MEASUREMENT_COLUMNS)?;
    for m in measurements {
        w.serialize(Row::from(m))?;
    }
    w.flush().map_err(|e| Error::io("<measurements>", e))?;
    Ok(())
}

pub fn read_measurements<R: Read>(reader: R) -> Result<Vec<Measurement>> {
    let mut r = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
    let headers = r.headers()?.clone();
    for col in MEASUREMENT_COLUMNS {
        if !headers.iter().any(|h| h == col) {
            return Err(Error::Data(format!("missing column `{col}`")));
        }
    }
    let mut ids = HashSet::new();
    let mut out = Vec::new();
    for (i, rec) in r.deserialize::<Row>().enumerate() {
        let row = rec.map_err(|e| Error::Data(format!("row {}: {e}", i + 1)))?;
        if !ids.insert(row.circuit_id.clone()) {
            return Err(Error::DuplicateId(row.circuit_id));
        }
        out.push(row.into());
    }
    Ok(out)
}

/// Reads a measurement CSV; circuit ids need not refer to a known library.
pub fn load_measurements(path: &Path) -> Result<Vec<Measurement>> {
    let f = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    read_measurements(std::io::BufReader::new(f))
}
