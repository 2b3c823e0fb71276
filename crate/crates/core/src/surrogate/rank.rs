// SPDX-License-Identifier: Apache-2.0

use std::collections::BTreeMap;

use rayon::prelude::*;

use super::dataset::Dataset;
use super::model::{fit, Hyper, ModelKind, TrainedModel};
use crate::error::{Error, Result};
use crate::pareto::{fidelity_values, DEFAULT_FIDELITY_EPS};

/// Fits every kind, records its validation fidelity and returns all of them
/// sorted by descending fidelity, ties in kind order. Kinds that fail to fit
/// are skipped with a warning.
pub fn evaluate_models(
    kinds: &[ModelKind],
    hypers: &BTreeMap<ModelKind, Hyper>,
    train: &Dataset,
    valid: &Dataset,
    seed: u64,
) -> Result<Vec<TrainedModel>> {
    if train.feature_names() != valid.feature_names() {
        return Err(Error::Data("training and validation feature schemas differ".into()));
    }
    let measured = valid.targets();
    let default = Hyper::new();
    let fitted: Vec<(ModelKind, Result<TrainedModel>)> = kinds
        .par_iter()
        .map(|&kind| {
            let res = fit(kind, train, hypers.get(&kind).unwrap_or(&default), seed).and_then(|mut m| {
                let est = m.predict_dataset(valid)?;
                if est.iter().any(|v| !v.is_finite()) {
                    return Err(Error::Data(format!("{kind} produced a non-finite prediction")));
                }
                m.fidelity = Some(fidelity_values(&est, &measured, DEFAULT_FIDELITY_EPS)?);
                Ok(m)
            });
            (kind, res)
        })
        .collect();
    let mut models = Vec::new();
    for (kind, res) in fitted {
        match res {
            Ok(m) => models.push(m),
            Err(e) => log::warn!("skipping {kind} ({}): {e}", kind.label()),
        }
    }
    if models.is_empty() {
        return Err(Error::AllModelsFailed);
    }
    models.sort_by(|a, b| {
        let (fa, fb) = (a.fidelity.unwrap_or(0.0), b.fidelity.unwrap_or(0.0));
        fb.total_cmp(&fa).then(a.kind.cmp(&b.kind))
    });
    Ok(models)
}

/// The `top_k` best kinds by validation fidelity, with default hyperparameters.
pub fn rank_models(
    kinds: &[ModelKind],
    train: &Dataset,
    valid: &Dataset,
    top_k: usize,
    seed: u64,
) -> Result<Vec<TrainedModel>> {
    if top_k == 0 {
        return Err(Error::out_of_range("top_k", 0));
    }
    let mut models = evaluate_models(kinds, &BTreeMap::new(), train, valid, seed)?;
    models.truncate(top_k);
    Ok(models)
}
