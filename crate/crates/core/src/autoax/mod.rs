// SPDX-License-Identifier: Apache-2.0

//! Accelerator-level search: approximate multipliers and adders are
//! composed into a 3×3 convolution filter, SSIM and FPGA cost are estimated
//! from component features, and an archive hill climber is compared with
//! random search on exactly verified fronts.

mod eval;
mod export;
mod image;
mod palette;
mod search;
mod ssim;
mod template;

pub use eval::{aggregate_cost, sample_random, Configuration, EvaluatedConfig, Evaluator};
pub use export::{export_autoax, load_autoax_report, summarize_autoax, ARCHIVES_FILE, AUTOAX_REPORT_FILE};
pub use image::{synthetic_image, GrayImage};
pub use palette::{
    build_palette, select_spread, truncate_lsbs, Component, Palette, PaletteOptions, ADD_WIDTH, MULT_WIDTH,
    PALETTE_FILE,
};
pub use search::{
    config_feature_names, config_features, cost_value, exact_point, finalize, fit_estimators, hill_climb,
    hill_climb_observed, random_search, run_autoax, shared_reference, ArchiveEntry, AutoaxConfig, AutoaxReport,
    EstimatorOptions, Estimators, FinalFront, TargetComparison, MIN_ESTIMATOR_SAMPLES, NODE_FEATURES, SSIM_TARGET,
};
pub use ssim::{ssim, SSIM_WINDOW};
pub use template::{
    build_template, reference_filter, AcceleratorTemplate, Kernel, Role, TemplateNode, ADD_MAX, GAUSSIAN_KERNEL, N_ADD,
    N_MULT, N_NODES,
};

#[cfg(test)]
mod tests;
