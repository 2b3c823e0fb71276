// SPDX-License-Identifier: Apache-2.0

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::circuit::ErrorReport;
use crate::cost::{Measurement, OracleConfig, DEFAULT_LUT_K};
use crate::error::{Error, Result};
use crate::surrogate::{Hyper, ModelKind};

/// An FPGA cost estimated by the surrogates.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Target {
    #[serde(rename = "fpga_luts")]
    Luts,
    #[serde(rename = "fpga_latency_ns")]
    Latency,
    #[serde(rename = "fpga_power_mw")]
    Power,
}

impl Target {
    pub const ALL: [Target; 3] = [Target::Luts, Target::Latency, Target::Power];

    pub fn name(self) -> &'static str {
        match self {
            Target::Luts => "fpga_luts",
            Target::Latency => "fpga_latency_ns",
            Target::Power => "fpga_power_mw",
        }
    }

    pub fn value(self, m: &Measurement) -> f64 {
        match self {
            Target::Luts => m.fpga.luts as f64,
            Target::Latency => m.fpga.latency_ns,
            Target::Power => m.fpga.power_mw,
        }
    }
}

impl fmt::Display for Target {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// The error metric paired with every cost target.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ErrorObjective {
    MedRaw,
    #[default]
    MedNormPct,
    WorstCase,
    ErrorRate,
}

impl ErrorObjective {
    pub fn name(self) -> &'static str {
        match self {
            ErrorObjective::MedRaw => "med_raw",
            ErrorObjective::MedNormPct => "med_norm_pct",
            ErrorObjective::WorstCase => "worst_case",
            ErrorObjective::ErrorRate => "error_rate",
        }
    }

    pub fn value(self, e: &ErrorReport) -> f64 {
        match self {
            ErrorObjective::MedRaw => e.med_raw,
            ErrorObjective::MedNormPct => e.med_norm_pct,
            ErrorObjective::WorstCase => e.worst_case,
            ErrorObjective::ErrorRate => e.error_rate,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExplorationConfig {
    pub sample_fraction: f64,
    pub train_fraction: f64,
    /// Number of pseudo-Pareto fronts peeled per model.
    pub front_count: usize,
    pub top_k: usize,
    pub targets: Vec<Target>,
    pub error_objective: ErrorObjective,
    pub lut_k: usize,
    pub seed: u64,
    /// Peel once over the error and all estimated targets instead of per target.
    pub joint_peeling: bool,
    pub models: Vec<ModelKind>,
    pub hyper: BTreeMap<ModelKind, Hyper>,
    /// Random words per circuit when the input space is too wide to enumerate.
    pub error_samples: usize,
    /// Largest library [`ground_truth`](super::ground_truth) will measure.
    pub ground_truth_cap: usize,
    pub oracle: OracleConfig,
}

impl Default for ExplorationConfig {
    fn default() -> Self {
        ExplorationConfig {
            sample_fraction: 0.10,
            train_fraction: 0.80,
            front_count: 3,
            top_k: 3,
            targets: Target::ALL.to_vec(),
            error_objective: ErrorObjective::MedNormPct,
            lut_k: DEFAULT_LUT_K,
            seed: 0,
            joint_peeling: false,
            models: ModelKind::ALL.to_vec(),
            hyper: BTreeMap::new(),
            error_samples: 100_000,
            ground_truth_cap: 20_000,
            oracle: OracleConfig::default(),
        }
    }
}

impl ExplorationConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::Config(m.to_string()));
        if !(self.sample_fraction > 0.0 && self.sample_fraction < 1.0) {
            return bad("sample_fraction must lie strictly between 0 and 1");
        }
        if !(self.train_fraction > 0.0 && self.train_fraction < 1.0) {
            return bad("train_fraction must lie strictly between 0 and 1");
        }
        if self.front_count == 0 {
            return bad("front_count must be at least 1");
        }
        if self.top_k == 0 {
            return bad("top_k must be at least 1");
        }
        if self.targets.is_empty() {
            return bad("targets must not be empty");
        }
        if self.models.is_empty() {
            return bad("models must not be empty");
        }
        if !(2..=6).contains(&self.lut_k) {
            return bad("lut_k must be between 2 and 6");
        }
        if self.error_samples == 0 {
            return bad("error_samples must be at least 1");
        }
        Ok(())
    }

    /// Parses and validates; missing fields take their defaults.
    pub fn from_json(text: &str) -> Result<Self> {
        let mut cfg: ExplorationConfig = serde_json::from_str(text)?;
        // Re-run the oracle parser so partial tables are completed and checked.
        let oracle = serde_json::to_string(&cfg.oracle)?;
        cfg.oracle = OracleConfig::from_json(&oracle)?;
        let mut seen = Vec::new();
        cfg.targets.retain(|t| {
            let fresh = !seen.contains(t);
            seen.push(*t);
            fresh
        });
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text)
    }
}
