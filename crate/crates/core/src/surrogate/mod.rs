// SPDX-License-Identifier: Apache-2.0

//! Circuit feature extraction and the regression models that estimate FPGA
//! costs from them.

mod dataset;
mod features;
mod kernel;
mod knn;
mod linear;
mod model;
mod rank;
mod tree;

pub use dataset::{split, Dataset, Sample};
pub use features::{featurize, FeatureVector, FEATURE_NAMES, N_FEATURES};
pub use model::{fit, Hyper, ModelKind, Params, Standardization, TrainedModel};
pub use rank::{evaluate_models, rank_models};
pub use tree::{Node, Tree};
