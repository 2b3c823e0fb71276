// SPDX-License-Identifier: Apache-2.0

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::config::{ExplorationConfig, Target};
use crate::circuit::{error_metrics, error_metrics_sampled, Combinational, ErrorReport, Netlist, EXHAUSTIVE_LIMIT};
use crate::cost::{activity, asic_cost_with_activity, measure, measure_sampled, Measurement};
use crate::error::{Error, Result};
use crate::pareto::{coverage, pareto_front, peel_fronts, Front, Point};
use crate::surrogate::{evaluate_models, featurize, Dataset, FeatureVector, ModelKind};

/// Smallest library the exploration accepts.
pub const MIN_LIBRARY: usize = 20;

/// Where the per-circuit cost estimates come from.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum PredictionSource {
    #[default]
    Surrogates,
    /// Estimates equal the measured values; for testing the pipeline limits.
    /// The measurements behind it are not counted as oracle invocations.
    Perfect,
}

const PERFECT_LABEL: &str = "PERFECT";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModelScore {
    pub target: Target,
    pub kind: ModelKind,
    pub label: String,
    pub fidelity: f64,
    pub selected: bool,
}

/// Circuits on one pseudo-Pareto front of one model's estimates. `target` is
/// absent for joint peeling over all targets.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CandidateSet {
    pub target: Option<Target>,
    pub model: String,
    pub level: usize,
    pub ids: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScatterPoint {
    pub id: String,
    pub estimated: f64,
    pub measured: f64,
}

/// Estimated against measured values of one model over every measured circuit.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScatterSeries {
    pub target: Target,
    pub model: String,
    pub points: Vec<ScatterPoint>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExplorationReport {
    pub config: ExplorationConfig,
    pub library_size: usize,
    pub sampled_ids: Vec<String>,
    pub model_scores: Vec<ModelScore>,
    pub candidates: Vec<CandidateSet>,
    /// Distinct circuits on any candidate front.
    pub candidate_count: usize,
    /// Candidates together with the sampled subset.
    pub union_size: usize,
    pub invocations: usize,
    pub reduction_factor: f64,
    pub final_fronts: BTreeMap<Target, Front>,
    pub coverage: Option<BTreeMap<Target, f64>>,
    /// Every oracle measurement taken, in library order.
    pub measurements: Vec<Measurement>,
    pub scatter: Vec<ScatterSeries>,
}

impl ExplorationReport {
    /// Fills `coverage` from exhaustively computed true fronts.
    pub fn attach_coverage(&mut self, truth: &GroundTruth) -> Result<()> {
        let mut cov = BTreeMap::new();
        for (t, front) in &self.final_fronts {
            let true_front = truth
                .fronts
                .get(t)
                .ok_or_else(|| Error::Data(format!("ground truth lacks target {t}")))?;
            cov.insert(*t, coverage(front.ids(), true_front)?);
        }
        self.coverage = Some(cov);
        Ok(())
    }

    /// Ids of every candidate, across targets, models and levels.
    pub fn candidate_ids(&self) -> BTreeSet<&str> {
        self.candidates
            .iter()
            .flat_map(|c| c.ids.iter().map(String::as_str))
            .collect()
    }
}

/// Every circuit measured, with the true front per target.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GroundTruth {
    pub measurements: Vec<Measurement>,
    pub fronts: BTreeMap<Target, Front>,
}

fn check_library(library: &[Netlist], exact: &Netlist) -> Result<()> {
    let mut ids = HashSet::new();
    for n in library {
        if !ids.insert(n.name()) {
            return Err(Error::DuplicateId(n.name().to_string()));
        }
        if n.n_inputs() != exact.n_inputs() || n.n_outputs() != exact.n_outputs() {
            return Err(Error::WidthMismatch(format!(
                "`{}` has {}/{} inputs/outputs, reference has {}/{}",
                n.name(),
                n.n_inputs(),
                n.n_outputs(),
                exact.n_inputs(),
                exact.n_outputs()
            )));
        }
    }
    Ok(())
}

fn oracle(n: &Netlist, exact: &Netlist, cfg: &ExplorationConfig) -> Result<Measurement> {
    if exact.input_bits() <= EXHAUSTIVE_LIMIT {
        measure(n, exact, cfg.lut_k, &cfg.oracle)
    } else {
        measure_sampled(n, exact, cfg.lut_k, &cfg.oracle, cfg.error_samples, cfg.seed)
    }
}

fn error_of(n: &Netlist, exact: &Netlist, cfg: &ExplorationConfig) -> Result<ErrorReport> {
    if exact.input_bits() <= EXHAUSTIVE_LIMIT {
        error_metrics(n, exact)
    } else {
        error_metrics_sampled(n, exact, cfg.error_samples, cfg.seed)
    }
}

fn measure_all(
    library: &[Netlist],
    idx: &[usize],
    exact: &Netlist,
    cfg: &ExplorationConfig,
) -> Result<Vec<Measurement>> {
    idx.par_iter().map(|&i| oracle(&library[i], exact, cfg)).collect()
}

fn front_of(library: &[Netlist], errors: &[f64], values: &[(usize, f64)]) -> Result<Front> {
    let pts: Vec<Point> = values
        .iter()
        .map(|&(i, v)| Point::new(library[i].name(), vec![errors[i], v]))
        .collect();
    pareto_front(&pts)
}

/// Measures the whole library and returns the true front per target.
pub fn ground_truth(library: &[Netlist], exact: &Netlist, config: &ExplorationConfig) -> Result<GroundTruth> {
    config.validate()?;
    check_library(library, exact)?;
    if library.is_empty() {
        return Err(Error::Empty("library"));
    }
    if library.len() > config.ground_truth_cap {
        return Err(Error::BudgetExceeded {
            size: library.len(),
            cap: config.ground_truth_cap,
        });
    }
    let all: Vec<usize> = (0..library.len()).collect();
    let measurements = measure_all(library, &all, exact, config)?;
    let errors: Vec<f64> = measurements
        .iter()
        .map(|m| config.error_objective.value(&m.error))
        .collect();
    let mut fronts = BTreeMap::new();
    for &t in &config.targets {
        let values: Vec<(usize, f64)> = measurements.iter().enumerate().map(|(i, m)| (i, t.value(m))).collect();
        fronts.insert(t, front_of(library, &errors, &values)?);
    }
    Ok(GroundTruth { measurements, fronts })
}

pub fn run_exploration(library: &[Netlist], exact: &Netlist, config: &ExplorationConfig) -> Result<ExplorationReport> {
    run_exploration_with(library, exact, config, PredictionSource::Surrogates)
}

/// Estimates per (target, model): the model label and one value per library circuit.
type Estimates = BTreeMap<Target, Vec<(String, Vec<f64>)>>;

pub fn run_exploration_with(
    library: &[Netlist],
    exact: &Netlist,
    config: &ExplorationConfig,
    source: PredictionSource,
) -> Result<ExplorationReport> {
    config.validate()?;
    check_library(library, exact)?;
    let n = library.len();
    if n < MIN_LIBRARY {
        return Err(Error::Data(format!(
            "library has {n} circuits, at least {MIN_LIBRARY} are needed"
        )));
    }

    // Sample and measure the training subset.
    let n_sample = ((config.sample_fraction * n as f64).ceil() as usize).clamp(2, n);
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(config.seed));
    let mut sampled = order[..n_sample].to_vec();
    sampled.sort_unstable();
    let mut measured: BTreeMap<usize, Measurement> = sampled
        .iter()
        .copied()
        .zip(measure_all(library, &sampled, exact, config)?)
        .collect();
    log::info!("measured {} sampled circuits of {n}", sampled.len());

    // Error objective and features for every circuit; both are cheap.
    let (errors, features): (Vec<f64>, Vec<FeatureVector>) = library
        .par_iter()
        .map(|c| -> Result<(f64, FeatureVector)> {
            let e = error_of(c, exact, config)?;
            let asic = asic_cost_with_activity(c, &activity(c), &config.oracle);
            Ok((config.error_objective.value(&e), featurize(c, &asic)))
        })
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .unzip();

    let mut model_scores = Vec::new();
    let mut estimates: Estimates = BTreeMap::new();
    match source {
        PredictionSource::Surrogates => {
            for &t in &config.targets {
                let ds = Dataset::from_features(
                    t.name(),
                    sampled
                        .iter()
                        .map(|&i| (library[i].name().to_string(), features[i], t.value(&measured[&i]))),
                )?;
                let (train, valid) = crate::surrogate::split(&ds, config.train_fraction, config.seed)?;
                let ranked = evaluate_models(&config.models, &config.hyper, &train, &valid, config.seed)?;
                let mut kept = Vec::new();
                for (rank, m) in ranked.iter().enumerate() {
                    let selected = rank < config.top_k;
                    model_scores.push(ModelScore {
                        target: t,
                        kind: m.kind,
                        label: m.kind.label().to_string(),
                        fidelity: m.fidelity.unwrap_or(0.0),
                        selected,
                    });
                    if selected {
                        let est: Vec<f64> = features
                            .par_iter()
                            .map(|f| m.predict(f.as_slice()))
                            .collect::<Result<_>>()?;
                        kept.push((m.kind.name().to_string(), est));
                    }
                }
                log::info!(
                    "{t}: kept {}",
                    kept.iter().map(|(k, _)| k.as_str()).collect::<Vec<_>>().join(", ")
                );
                estimates.insert(t, kept);
            }
        }
        PredictionSource::Perfect => {
            let all: Vec<usize> = (0..n).collect();
            let truth = measure_all(library, &all, exact, config)?;
            for &t in &config.targets {
                let est = truth.iter().map(|m| t.value(m)).collect();
                estimates.insert(t, vec![(PERFECT_LABEL.to_string(), est)]);
            }
        }
    }

    // Peel pseudo-Pareto fronts of the estimates.
    let mut candidates = Vec::new();
    if config.joint_peeling {
        let depth = estimates.values().map(Vec::len).max().unwrap_or(0);
        for rank in 0..depth {
            let chosen: Vec<&(String, Vec<f64>)> = estimates
                .values()
                .map(|models| &models[rank.min(models.len() - 1)])
                .collect();
            let pts: Vec<Point> = (0..n)
                .map(|i| {
                    let mut obj = vec![errors[i]];
                    obj.extend(chosen.iter().map(|(_, est)| est[i]));
                    Point::new(library[i].name(), obj)
                })
                .collect();
            let label = chosen.iter().map(|(k, _)| k.as_str()).collect::<Vec<_>>().join("+");
            for f in peel_fronts(&pts, config.front_count)? {
                candidates.push(CandidateSet {
                    target: None,
                    model: label.clone(),
                    level: f.level,
                    ids: f.ids().map(String::from).collect(),
                });
            }
        }
    } else {
        for (t, models) in &estimates {
            for (label, est) in models {
                let pts: Vec<Point> = (0..n)
                    .map(|i| Point::new(library[i].name(), vec![errors[i], est[i]]))
                    .collect();
                for f in peel_fronts(&pts, config.front_count)? {
                    candidates.push(CandidateSet {
                        target: Some(*t),
                        model: label.clone(),
                        level: f.level,
                        ids: f.ids().map(String::from).collect(),
                    });
                }
            }
        }
    }

    // Measure every candidate not yet measured.
    let index: HashMap<&str, usize> = library.iter().enumerate().map(|(i, c)| (c.name(), i)).collect();
    let candidate_idx: BTreeSet<usize> = candidates
        .iter()
        .flat_map(|c| c.ids.iter().map(|id| index[id.as_str()]))
        .collect();
    let fresh: Vec<usize> = candidate_idx
        .iter()
        .copied()
        .filter(|i| !measured.contains_key(i))
        .collect();
    measured.extend(fresh.iter().copied().zip(measure_all(library, &fresh, exact, config)?));
    let invocations = measured.len();
    log::info!("{} candidates, {invocations} oracle invocations", candidate_idx.len());

    // Final fronts over real measurements only.
    let mut final_fronts = BTreeMap::new();
    for &t in &config.targets {
        let values: Vec<(usize, f64)> = measured.iter().map(|(&i, m)| (i, t.value(m))).collect();
        final_fronts.insert(t, front_of(library, &errors, &values)?);
    }

    let scatter = estimates
        .iter()
        .flat_map(|(t, models)| {
            let measured = &measured;
            models.iter().map(move |(label, est)| ScatterSeries {
                target: *t,
                model: label.clone(),
                points: measured
                    .iter()
                    .map(|(&i, m)| ScatterPoint {
                        id: library[i].name().to_string(),
                        estimated: est[i],
                        measured: t.value(m),
                    })
                    .collect(),
            })
        })
        .collect();

    Ok(ExplorationReport {
        config: config.clone(),
        library_size: n,
        sampled_ids: sampled.iter().map(|&i| library[i].name().to_string()).collect(),
        model_scores,
        candidates,
        candidate_count: candidate_idx.len(),
        union_size: invocations,
        invocations,
        reduction_factor: n as f64 / invocations as f64,
        final_fronts,
        coverage: None,
        measurements: measured.into_values().collect(),
        scatter,
    })
}
