// SPDX-License-Identifier: Apache-2.0

//! Surrogate-assisted design-space exploration for approximate arithmetic
//! circuits on FPGAs.
//!
//! The crate is organized bottom-up:
//!
//! * [`circuit`]: gate-level netlists, exhaustive simulation and error metrics.
//! * [`cost`]: a deterministic ASIC-proxy and k-LUT FPGA cost oracle.
//! * [`surrogate`]: feature extraction and the regression models used as cost estimators.
//! * [`pareto`]: dominance, front peeling, fidelity, coverage and hypervolume.
//! * [`explorer`]: the sample/train/estimate/peel/re-measure pipeline.
//! * [`autoax`]: composing components into a Gaussian-filter accelerator and
//!   searching its configuration space.

pub mod autoax;
pub mod circuit;
pub mod cost;
pub mod error;
pub mod explorer;
pub mod pareto;
pub mod surrogate;

pub use error::{Error, Result};
