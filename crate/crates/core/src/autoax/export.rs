// SPDX-License-Identifier: Apache-2.0

use std::fmt::Write as _;
use std::fs::{self, File};
use std::io::BufWriter;
use std::path::{Path, PathBuf};

use super::search::{AutoaxReport, FinalFront};
use crate::error::{Error, Result};

pub const AUTOAX_REPORT_FILE: &str = "autoax_report.json";
pub const ARCHIVES_FILE: &str = "archives.json";

const FRONT_COLUMNS: [&str; 5] = ["config", "ssim", "fpga_luts", "fpga_latency_ns", "fpga_power_mw"];

fn write_front(path: &Path, front: &FinalFront) -> Result<()> {
    let file = File::create(path).map(BufWriter::new).map_err(|e| Error::io(path, e))?;
    let mut w = csv::Writer::from_writer(file);
    w.write_record(FRONT_COLUMNS)?;
    for e in front.front_configs() {
        w.write_record([
            e.config.to_string(),
            e.ssim.to_string(),
            e.cost.luts.to_string(),
            e.cost.latency_ns.to_string(),
            e.cost.power_mw.to_string(),
        ])?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

/// Writes the full report, the estimated archives on their own, and one
/// verified front CSV per (target, search). Rewrites are byte-identical.
pub fn export_autoax(report: &AutoaxReport, dir: &Path) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let mut written = Vec::new();
    let path = dir.join(AUTOAX_REPORT_FILE);
    fs::write(&path, serde_json::to_string_pretty(report)? + "\n").map_err(|e| Error::io(&path, e))?;
    written.push(path);

    let archives: serde_json::Map<String, serde_json::Value> = report
        .comparisons
        .iter()
        .map(|c| {
            let v = serde_json::json!({
                "hill_climb": c.hill_climb_archive,
                "random_search": c.random_archive,
            });
            (c.target.name().to_string(), v)
        })
        .collect();
    let path = dir.join(ARCHIVES_FILE);
    fs::write(&path, serde_json::to_string_pretty(&archives)? + "\n").map_err(|e| Error::io(&path, e))?;
    written.push(path);

    for c in &report.comparisons {
        for (name, front) in [("hill_climb", &c.hill_climb), ("random_search", &c.random)] {
            let path = dir.join(format!("front_{}_{name}.csv", c.target.name()));
            write_front(&path, front)?;
            written.push(path);
        }
    }
    Ok(written)
}

pub fn load_autoax_report(dir: &Path) -> Result<AutoaxReport> {
    let path = dir.join(AUTOAX_REPORT_FILE);
    let text = fs::read_to_string(&path).map_err(|e| Error::io(&path, e))?;
    Ok(serde_json::from_str(&text)?)
}

pub fn summarize_autoax(report: &AutoaxReport) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "design space      {:.3e}", report.design_space_size);
    let _ = writeln!(s, "multipliers       {}", report.mult_palette.len());
    let _ = writeln!(s, "adders            {}", report.add_palette.len());
    for (k, f) in &report.estimator_fidelity {
        let _ = writeln!(s, "fidelity {k:<16} {f:.3}");
    }
    let _ = writeln!(
        s,
        "\n{:<16} {:>8} {:>8} {:>12} {:>12}",
        "target", "hc front", "rs front", "hc hv", "rs hv"
    );
    for c in &report.comparisons {
        let _ = writeln!(
            s,
            "{:<16} {:>8} {:>8} {:>12.4} {:>12.4}",
            c.target.name(),
            c.hill_climb.front.len(),
            c.random.front.len(),
            c.hill_climb_hypervolume,
            c.random_hypervolume
        );
    }
    s
}
