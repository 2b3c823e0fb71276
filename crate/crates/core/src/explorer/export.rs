// SPDX-License-Identifier: Apache-2.0

use std::fmt::Write as _;
use std::fs::{self, File};
use std::io::BufWriter;
use std::path::{Path, PathBuf};

use super::run::ExplorationReport;
use crate::cost::write_measurements;
use crate::error::{Error, Result};
use crate::pareto::write_fronts;

pub const REPORT_FILE: &str = "report.json";
pub const MEASUREMENTS_FILE: &str = "measurements.csv";

fn create(path: PathBuf) -> Result<BufWriter<File>> {
    File::create(&path).map(BufWriter::new).map_err(|e| Error::io(path, e))
}

/// Writes `report.json`, one front CSV per target, the measurements and one
/// estimated-versus-measured CSV per (target, model). Rewriting the same
/// report produces identical files.
pub fn export_report(report: &ExplorationReport, dir: &Path) -> Result<Vec<PathBuf>> {
    report.config.validate()?;
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let mut written = Vec::new();

    let path = dir.join(REPORT_FILE);
    let json = serde_json::to_string_pretty(report)?;
    fs::write(&path, json + "\n").map_err(|e| Error::io(&path, e))?;
    written.push(path);

    let error_name = report.config.error_objective.name();
    for (t, front) in &report.final_fronts {
        let path = dir.join(format!("front_{}.csv", t.name()));
        write_fronts(
            create(path.clone())?,
            std::slice::from_ref(front),
            &[error_name, t.name()],
        )?;
        written.push(path);
    }

    let path = dir.join(MEASUREMENTS_FILE);
    write_measurements(create(path.clone())?, &report.measurements)?;
    written.push(path);

    for s in &report.scatter {
        let path = dir.join(format!("scatter_{}_{}.csv", s.target.name(), s.model.to_lowercase()));
        let mut w = csv::Writer::from_writer(create(path.clone())?);
        w.write_record(["id", "estimated", "measured"])?;
        for p in &s.points {
            w.write_record([p.id.clone(), p.estimated.to_string(), p.measured.to_string()])?;
        }
        w.flush().map_err(|e| Error::io(&path, e))?;
        written.push(path);
    }
    Ok(written)
}

/// Reads `report.json` back from an export directory.
pub fn load_report(dir: &Path) -> Result<ExplorationReport> {
    let path = dir.join(REPORT_FILE);
    let text = fs::read_to_string(&path).map_err(|e| Error::io(&path, e))?;
    Ok(serde_json::from_str(&text)?)
}

/// Plain-text summary table of a report.
pub fn summarize(report: &ExplorationReport) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "library size      {}", report.library_size);
    let _ = writeln!(s, "sampled           {}", report.sampled_ids.len());
    let _ = writeln!(s, "candidates        {}", report.candidate_count);
    let _ = writeln!(s, "oracle calls      {}", report.invocations);
    let _ = writeln!(s, "reduction factor  {:.2}x", report.reduction_factor);
    if !report.model_scores.is_empty() {
        let _ = writeln!(s, "\n{:<16} {:<18} {:>6} {:>9}", "target", "model", "label", "fidelity");
        for m in &report.model_scores {
            let mark = if m.selected { "*" } else { " " };
            let _ = writeln!(
                s,
                "{:<16} {:<18} {:>6} {:>8.3}{mark}",
                m.target.name(),
                m.kind.name(),
                m.label,
                m.fidelity
            );
        }
    }
    let _ = writeln!(s, "\n{:<16} {:>6} {:>9}", "target", "front", "coverage");
    for (t, f) in &report.final_fronts {
        let cov = report
            .coverage
            .as_ref()
            .and_then(|c| c.get(t))
            .map_or_else(|| "-".to_string(), |c| format!("{c:.3}"));
        let _ = writeln!(s, "{:<16} {:>6} {:>9}", t.name(), f.len(), cov);
    }
    s
}
