// SPDX-License-Identifier: Apache-2.0

//! The exploration pipeline: measure a random subset, train and rank cost
//! estimators on it, estimate the whole library, peel pseudo-Pareto fronts
//! of the estimates and measure only those candidates.

mod config;
mod export;
mod run;

pub use config::{ErrorObjective, ExplorationConfig, Target};
pub use export::{export_report, load_report, summarize, MEASUREMENTS_FILE, REPORT_FILE};
pub use run::{
    ground_truth, run_exploration, run_exploration_with, CandidateSet, ExplorationReport, GroundTruth, ModelScore,
    PredictionSource, ScatterPoint, ScatterSeries, MIN_LIBRARY,
};
