// SPDX-License-Identifier: Apache-2.0

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::dataset::Dataset;
use super::{kernel, knn, linear, tree};
use crate::error::{Error, Result};

/// The supported regression families, each tagged with its `ML<n>` label.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum ModelKind {
    OlsAsicPower,
    OlsAsicLatency,
    OlsAsicArea,
    Pls,
    RandomForest,
    KernelRidge,
    BayesianRidge,
    Ridge,
    Knn,
    DecisionTree,
}

/// Labels of the families that are recognized but not implemented.
const UNSUPPORTED: [(&str, &str); 8] = [
    ("ML6", "GRADIENT_BOOSTING"),
    ("ML7", "ADABOOST"),
    ("ML8", "GAUSSIAN_PROCESS"),
    ("ML9", "SYMBOLIC_REGRESSION"),
    ("ML12", "LASSO"),
    ("ML13", "LARS"),
    ("ML15", "SGD"),
    ("ML17", "MLP"),
];

impl ModelKind {
    pub const ALL: [ModelKind; 10] = [
        ModelKind::OlsAsicPower,
        ModelKind::OlsAsicLatency,
        ModelKind::OlsAsicArea,
        ModelKind::Pls,
        ModelKind::RandomForest,
        ModelKind::KernelRidge,
        ModelKind::BayesianRidge,
        ModelKind::Ridge,
        ModelKind::Knn,
        ModelKind::DecisionTree,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ModelKind::OlsAsicPower => "OLS_ASIC_POWER",
            ModelKind::OlsAsicLatency => "OLS_ASIC_LATENCY",
            ModelKind::OlsAsicArea => "OLS_ASIC_AREA",
            ModelKind::Pls => "PLS",
            ModelKind::RandomForest => "RANDOM_FOREST",
            ModelKind::KernelRidge => "KERNEL_RIDGE",
            ModelKind::BayesianRidge => "BAYESIAN_RIDGE",
            ModelKind::Ridge => "RIDGE",
            ModelKind::Knn => "KNN",
            ModelKind::DecisionTree => "DECISION_TREE",
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            ModelKind::OlsAsicPower => "ML1",
            ModelKind::OlsAsicLatency => "ML2",
            ModelKind::OlsAsicArea => "ML3",
            ModelKind::Pls => "ML4",
            ModelKind::RandomForest => "ML5",
            ModelKind::KernelRidge => "ML10",
            ModelKind::BayesianRidge => "ML11",
            ModelKind::Ridge => "ML14",
            ModelKind::Knn => "ML16",
            ModelKind::DecisionTree => "ML18",
        }
    }

    /// Feature regressed on by the single-feature least-squares kinds.
    fn ols_feature(self) -> Option<&'static str> {
        match self {
            ModelKind::OlsAsicPower => Some("asic_power"),
            ModelKind::OlsAsicLatency => Some("asic_delay"),
            ModelKind::OlsAsicArea => Some("asic_area"),
            _ => None,
        }
    }

    /// Accepted keys with defaults; `None` defaults are resolved from data.
    fn hyper_spec(self) -> &'static [(&'static str, Option<f64>, Domain)] {
        use Domain::*;
        match self {
            ModelKind::OlsAsicPower | ModelKind::OlsAsicLatency | ModelKind::OlsAsicArea => &[],
            ModelKind::Ridge => &[("alpha", Some(1.0), NonNegative)],
            ModelKind::KernelRidge => &[("alpha", Some(1.0), NonNegative), ("bandwidth", None, Positive)],
            ModelKind::BayesianRidge => &[("max_iter", Some(300.0), Count), ("tol", Some(1e-6), Positive)],
            ModelKind::Pls => &[("n_components", None, Count)],
            ModelKind::Knn => &[("k", Some(5.0), Count), ("weighted", Some(0.0), Flag)],
            ModelKind::DecisionTree => &[("max_depth", Some(8.0), Depth), ("min_leaf", Some(3.0), Count)],
            ModelKind::RandomForest => &[
                ("n_trees", Some(50.0), Count),
                ("max_depth", Some(8.0), Depth),
                ("min_leaf", Some(3.0), Count),
                ("max_features", None, Count),
                ("bootstrap", Some(1.0), Flag),
            ],
        }
    }
}

impl fmt::Display for ModelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl From<ModelKind> for String {
    fn from(k: ModelKind) -> String {
        k.name().to_string()
    }
}

impl TryFrom<String> for ModelKind {
    type Error = Error;

    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl FromStr for ModelKind {
    type Err = Error;

    /// Accepts either the name or the `ML<n>` label, case-insensitively.
    fn from_str(s: &str) -> Result<Self> {
        let up = s.trim().to_ascii_uppercase();
        if let Some(k) = ModelKind::ALL.iter().find(|k| k.name() == up || k.label() == up) {
            return Ok(*k);
        }
        if let Some((label, name)) = UNSUPPORTED.iter().find(|(l, n)| *l == up || *n == up) {
            return Err(Error::UnsupportedModel(format!("{label} ({name}) is not implemented")));
        }
        Err(Error::UnsupportedModel(format!("unknown model kind `{s}`")))
    }
}

#[derive(Clone, Copy, Debug)]
enum Domain {
    NonNegative,
    Positive,
    Count,
    Depth,
    Flag,
}

impl Domain {
    fn accepts(self, v: f64) -> bool {
        v.is_finite()
            && match self {
                Domain::NonNegative => v >= 0.0,
                Domain::Positive => v > 0.0,
                Domain::Count => v >= 1.0 && v.fract() == 0.0,
                Domain::Depth => v >= 0.0 && v.fract() == 0.0,
                Domain::Flag => v == 0.0 || v == 1.0,
            }
    }
}

/// Named numeric hyperparameters. Flags are 0/1, counts are whole numbers.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Hyper(pub BTreeMap<String, f64>);

impl Hyper {
    pub fn new() -> Self {
        Hyper::default()
    }

    pub fn with(mut self, key: &str, value: f64) -> Self {
        self.0.insert(key.to_string(), value);
        self
    }

    pub fn get(&self, key: &str) -> Option<f64> {
        self.0.get(key).copied()
    }

    fn req(&self, key: &str) -> f64 {
        self.0[key]
    }

    fn count(&self, key: &str) -> usize {
        self.req(key) as usize
    }

    /// Validates keys and domains for `kind` and fills the defaults that do
    /// not depend on the data.
    pub fn resolve(&self, kind: ModelKind, n_features: usize) -> Result<Hyper> {
        let spec = kind.hyper_spec();
        let bad = |message: String| Error::Hyperparameter {
            kind: kind.name().to_string(),
            message,
        };
        for (key, value) in &self.0 {
            let (_, _, domain) = spec
                .iter()
                .find(|(k, _, _)| k == key)
                .ok_or_else(|| bad(format!("unknown key `{key}`")))?;
            if !domain.accepts(*value) {
                return Err(bad(format!("`{key}` = {value} is out of range")));
            }
        }
        let mut out = self.clone();
        for (key, default, _) in spec {
            if let Some(d) = default {
                out.0.entry(key.to_string()).or_insert(*d);
            }
        }
        match kind {
            ModelKind::Pls => {
                let nc = out
                    .0
                    .entry("n_components".into())
                    .or_insert(n_features.clamp(1, 4) as f64);
                if *nc as usize > n_features.max(1) {
                    return Err(bad(format!("n_components {nc} exceeds {n_features} features")));
                }
            }
            ModelKind::RandomForest => {
                let mf = out
                    .0
                    .entry("max_features".into())
                    .or_insert((n_features as f64).sqrt().ceil().max(1.0));
                *mf = mf.min(n_features.max(1) as f64);
            }
            _ => {}
        }
        Ok(out)
    }
}

/// Per-feature training mean and scale. Constant columns get scale 1 and map to 0.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Standardization {
    pub mean: Vec<f64>,
    pub scale: Vec<f64>,
}

impl Standardization {
    pub fn fit(data: &Dataset) -> Self {
        let rows = data.rows();
        let p = data.feature_names().len();
        let n = rows.len() as f64;
        let mut mean = vec![0.0; p];
        let mut scale = vec![1.0; p];
        for j in 0..p {
            let first = rows[0].features[j];
            if rows.iter().all(|r| r.features[j] == first) {
                mean[j] = first;
                continue;
            }
            let m = rows.iter().map(|r| r.features[j]).sum::<f64>() / n;
            let var = rows.iter().map(|r| (r.features[j] - m).powi(2)).sum::<f64>() / n;
            mean[j] = m;
            let sd = var.sqrt();
            if sd > 1e-12 * m.abs().max(f64::MIN_POSITIVE) {
                scale[j] = sd;
            }
        }
        Standardization { mean, scale }
    }

    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        x.iter()
            .zip(self.mean.iter().zip(&self.scale))
            .map(|(v, (m, s))| (v - m) / s)
            .collect()
    }

    fn matrix(&self, data: &Dataset) -> DMatrix<f64> {
        let p = self.mean.len();
        let rows = data.rows();
        DMatrix::from_fn(rows.len(), p, |i, j| {
            (rows[i].features[j] - self.mean[j]) / self.scale[j]
        })
    }
}

/// Fitted parameters, all expressed over standardized features.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "form", rename_all = "snake_case")]
pub enum Params {
    Linear {
        intercept: f64,
        coef: Vec<f64>,
    },
    Bayesian {
        intercept: f64,
        coef: Vec<f64>,
        noise_precision: f64,
        weight_precision: f64,
        iterations: usize,
    },
    Kernel {
        intercept: f64,
        bandwidth: f64,
        dual: Vec<f64>,
        support: Vec<Vec<f64>>,
    },
    Neighbors {
        k: usize,
        weighted: bool,
        points: Vec<Vec<f64>>,
        targets: Vec<f64>,
    },
    Tree {
        tree: tree::Tree,
    },
    Forest {
        trees: Vec<tree::Tree>,
    },
}

impl Params {
    fn eval(&self, z: &[f64]) -> f64 {
        let dot = |c: &[f64]| c.iter().zip(z).map(|(a, b)| a * b).sum::<f64>();
        match self {
            Params::Linear { intercept, coef } | Params::Bayesian { intercept, coef, .. } => intercept + dot(coef),
            Params::Kernel {
                intercept,
                bandwidth,
                dual,
                support,
            } => intercept + kernel::evaluate(*bandwidth, dual, support, z),
            Params::Neighbors {
                k,
                weighted,
                points,
                targets,
            } => knn::predict(*k, *weighted, points, targets, z),
            Params::Tree { tree } => tree.predict(z),
            Params::Forest { trees } => trees.iter().map(|t| t.predict(z)).sum::<f64>() / trees.len() as f64,
        }
    }
}

/// A fitted model with everything needed to predict from raw features.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrainedModel {
    pub kind: ModelKind,
    pub hyper: Hyper,
    pub feature_names: Vec<String>,
    pub target: String,
    pub standardization: Standardization,
    pub parameters: Params,
    /// Validation fidelity, set by ranking.
    pub fidelity: Option<f64>,
}

impl TrainedModel {
    pub fn predict(&self, features: &[f64]) -> Result<f64> {
        if features.len() != self.feature_names.len() {
            return Err(Error::Dimension {
                expected: self.feature_names.len(),
                found: features.len(),
            });
        }
        Ok(self.parameters.eval(&self.standardization.apply(features)))
    }

    pub fn predict_dataset(&self, data: &Dataset) -> Result<Vec<f64>> {
        if data.feature_names() != self.feature_names.as_slice() {
            return Err(Error::Data("feature schema differs from the training data".into()));
        }
        data.rows().iter().map(|r| self.predict(&r.features)).collect()
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_json()?).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text)
    }
}

/// Fits `kind` on standardized training features. `seed` drives the forest.
pub fn fit(kind: ModelKind, train: &Dataset, hyper: &Hyper, seed: u64) -> Result<TrainedModel> {
    let p = train.feature_names().len();
    let mut hyper = hyper.resolve(kind, p)?;
    let standardization = Standardization::fit(train);
    let x = standardization.matrix(train);
    let y = DVector::from_vec(train.targets());
    let parameters = match kind {
        ModelKind::OlsAsicPower | ModelKind::OlsAsicLatency | ModelKind::OlsAsicArea => {
            let name = kind.ols_feature().expect("single-feature kind");
            let j = train
                .feature_index(name)
                .ok_or_else(|| Error::Data(format!("{kind} needs feature `{name}`")))?;
            linear::single_feature(&x, &y, j)
        }
        ModelKind::Ridge => linear::ridge(&x, &y, hyper.req("alpha"))?,
        ModelKind::BayesianRidge => linear::bayesian_ridge(&x, &y, hyper.count("max_iter"), hyper.req("tol"))?,
        ModelKind::Pls => linear::pls(&x, &y, hyper.count("n_components")),
        ModelKind::KernelRidge => {
            let bandwidth = match hyper.get("bandwidth") {
                Some(b) => b,
                None => {
                    let b = kernel::median_distance(&x);
                    hyper.0.insert("bandwidth".into(), b);
                    b
                }
            };
            kernel::fit(&x, &y, hyper.req("alpha"), bandwidth)?
        }
        ModelKind::Knn => knn::fit(&x, &y, hyper.count("k"), hyper.req("weighted") == 1.0),
        ModelKind::DecisionTree => {
            let cfg = tree::TreeConfig {
                max_depth: hyper.count("max_depth"),
                min_leaf: hyper.count("min_leaf"),
                max_features: p,
            };
            Params::Tree {
                tree: tree::Tree::fit(&x, y.as_slice(), &cfg, None),
            }
        }
        ModelKind::RandomForest => {
            let cfg = tree::TreeConfig {
                max_depth: hyper.count("max_depth"),
                min_leaf: hyper.count("min_leaf"),
                max_features: hyper.count("max_features"),
            };
            Params::Forest {
                trees: tree::forest(
                    &x,
                    y.as_slice(),
                    &cfg,
                    hyper.count("n_trees"),
                    hyper.req("bootstrap") == 1.0,
                    seed,
                ),
            }
        }
    };
    Ok(TrainedModel {
        kind,
        hyper,
        feature_names: train.feature_names().to_vec(),
        target: train.target().to_string(),
        standardization,
        parameters,
        fidelity: None,
    })
}
