// SPDX-License-Identifier: Apache-2.0

use std::collections::{BTreeMap, HashSet};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::eval::{random_config, sample_random, Configuration, EvaluatedConfig, Evaluator};
use super::palette::Palette;
use super::template::AcceleratorTemplate;
use crate::cost::FpgaCost;
use crate::error::{Error, Result};
use crate::explorer::Target;
use crate::pareto::{fidelity_values, hypervolume2d, pareto_front, Front, Point, DEFAULT_FIDELITY_EPS};
use crate::surrogate::{fit, split, Dataset, Hyper, ModelKind, Sample, TrainedModel};

pub const MIN_ESTIMATOR_SAMPLES: usize = 20;
pub const NODE_FEATURES: [&str; 4] = ["med_norm_pct", "luts", "power_mw", "latency_ns"];
pub const SSIM_TARGET: &str = "ssim";

pub fn cost_value(target: Target, cost: &FpgaCost) -> f64 {
    match target {
        Target::Luts => cost.luts as f64,
        Target::Latency => cost.latency_ns,
        Target::Power => cost.power_mw,
    }
}

/// `n{node}_{field}` for every node, in node order.
pub fn config_feature_names(template: &AcceleratorTemplate) -> Vec<String> {
    (0..template.nodes.len())
        .flat_map(|n| NODE_FEATURES.iter().map(move |f| format!("n{n}_{f}")))
        .collect()
}

/// Concatenated (error, LUTs, power, latency) of each node's component.
pub fn config_features(config: &Configuration, template: &AcceleratorTemplate, palette: &Palette) -> Result<Vec<f64>> {
    config.validate(template, palette)?;
    let mut out = Vec::with_capacity(template.nodes.len() * NODE_FEATURES.len());
    for (node, &idx) in config.0.iter().enumerate() {
        let c = &palette.role(template.role(node))[idx];
        out.extend([c.med_norm_pct, c.cost.luts as f64, c.cost.power_mw, c.cost.latency_ns]);
    }
    Ok(out)
}

/// Estimated SSIM and cost targets for unseen configurations.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Estimators {
    pub ssim: TrainedModel,
    pub costs: BTreeMap<Target, TrainedModel>,
}

impl Estimators {
    /// (1 − estimated SSIM, estimated cost) for one cost target.
    pub fn objectives(&self, target: Target, features: &[f64]) -> Result<[f64; 2]> {
        let model = self
            .costs
            .get(&target)
            .ok_or_else(|| Error::Config(format!("no estimator for {target}")))?;
        Ok([1.0 - self.ssim.predict(features)?, model.predict(features)?])
    }

    /// Held-out fidelity per target name, as recorded at fit time.
    pub fn fidelities(&self) -> BTreeMap<String, f64> {
        std::iter::once((SSIM_TARGET.to_string(), &self.ssim))
            .chain(self.costs.iter().map(|(t, m)| (t.name().to_string(), m)))
            .filter_map(|(k, m)| m.fidelity.map(|f| (k, f)))
            .collect()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EstimatorOptions {
    pub kind: ModelKind,
    pub hyper: Hyper,
    pub train_fraction: f64,
    pub seed: u64,
}

impl Default for EstimatorOptions {
    fn default() -> Self {
        EstimatorOptions {
            kind: ModelKind::RandomForest,
            hyper: Hyper::new(),
            train_fraction: 0.8,
            seed: 0,
        }
    }
}

fn fit_target(data: &Dataset, opts: &EstimatorOptions) -> Result<TrainedModel> {
    let (train, valid) = split(data, opts.train_fraction, opts.seed)?;
    let probe = fit(opts.kind, &train, &opts.hyper, opts.seed)?;
    let fidelity = fidelity_values(&probe.predict_dataset(&valid)?, &valid.targets(), DEFAULT_FIDELITY_EPS)?;
    let mut model = fit(opts.kind, data, &opts.hyper, opts.seed)?;
    model.fidelity = Some(fidelity);
    Ok(model)
}

/// Fits one model for SSIM and one per cost target. Each records its
/// fidelity on a held-out split and is then refit on all samples.
pub fn fit_estimators(
    evaluated: &[EvaluatedConfig],
    template: &AcceleratorTemplate,
    palette: &Palette,
    targets: &[Target],
    opts: &EstimatorOptions,
) -> Result<Estimators> {
    if evaluated.len() < MIN_ESTIMATOR_SAMPLES {
        return Err(Error::Data(format!(
            "{} evaluated configurations, at least {MIN_ESTIMATOR_SAMPLES} needed",
            evaluated.len()
        )));
    }
    let names = config_feature_names(template);
    let features = evaluated
        .iter()
        .map(|e| config_features(&e.config, template, palette))
        .collect::<Result<Vec<_>>>()?;
    let dataset = |target: &str, value: &dyn Fn(&EvaluatedConfig) -> f64| {
        // Sampled configurations may repeat, so rows are keyed by position.
        let rows = evaluated
            .iter()
            .zip(&features)
            .enumerate()
            .map(|(i, (e, f))| Sample {
                id: format!("s{i}"),
                features: f.clone(),
                target: value(e),
            })
            .collect();
        Dataset::new(names.clone(), target, rows)
    };
    let ssim = fit_target(&dataset(SSIM_TARGET, &|e| e.ssim)?, opts)?;
    let mut costs = BTreeMap::new();
    for &t in targets {
        costs.insert(t, fit_target(&dataset(t.name(), &|e| cost_value(t, &e.cost))?, opts)?);
    }
    Ok(Estimators { ssim, costs })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ArchiveEntry {
    pub config: Configuration,
    /// Estimated (1 − SSIM, cost).
    pub objectives: [f64; 2],
}

fn dominates(a: &[f64; 2], b: &[f64; 2]) -> bool {
    a[0] <= b[0] && a[1] <= b[1] && (a[0] < b[0] || a[1] < b[1])
}

/// Adds `entry` unless its configuration is present or a member dominates
/// it, then evicts the members it dominates. Returns whether it was added.
fn archive_insert(archive: &mut Vec<ArchiveEntry>, entry: ArchiveEntry) -> bool {
    if archive
        .iter()
        .any(|m| m.config == entry.config || dominates(&m.objectives, &entry.objectives))
    {
        return false;
    }
    archive.retain(|m| !dominates(&entry.objectives, &m.objectives));
    archive.push(entry);
    true
}

struct Scorer<'a> {
    estimators: &'a Estimators,
    target: Target,
    template: &'a AcceleratorTemplate,
    palette: &'a Palette,
}

impl Scorer<'_> {
    fn entry(&self, config: Configuration) -> Result<ArchiveEntry> {
        let f = config_features(&config, self.template, self.palette)?;
        let objectives = self.estimators.objectives(self.target, &f)?;
        Ok(ArchiveEntry { config, objectives })
    }
}

/// Archive-based hill climbing over estimated objectives. `observe` sees the
/// archive after seeding and after every step.
pub fn hill_climb_observed(
    estimators: &Estimators,
    target: Target,
    template: &AcceleratorTemplate,
    palette: &Palette,
    budget: usize,
    seed: u64,
    mut observe: impl FnMut(&[ArchiveEntry]),
) -> Result<Vec<ArchiveEntry>> {
    let scorer = Scorer {
        estimators,
        target,
        template,
        palette,
    };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut archive = Vec::new();
    let start = random_config(&mut rng, template, palette);
    archive_insert(&mut archive, scorer.entry(start)?);
    archive_insert(&mut archive, scorer.entry(Configuration::exact(template))?);
    observe(&archive);
    let mutable: Vec<usize> = (0..template.nodes.len())
        .filter(|&n| palette.role(template.role(n)).len() > 1)
        .collect();
    for _ in 0..budget {
        if let Some(&node) = mutable.choose(&mut rng) {
            let parent = &archive[rng.gen_range(0..archive.len())];
            let mut child = parent.config.clone();
            let size = palette.role(template.role(node)).len();
            // Uniform over the other indices.
            let pick = rng.gen_range(0..size - 1);
            child.0[node] = if pick >= child.0[node] { pick + 1 } else { pick };
            archive_insert(&mut archive, scorer.entry(child)?);
        }
        observe(&archive);
    }
    Ok(archive)
}

pub fn hill_climb(
    estimators: &Estimators,
    target: Target,
    template: &AcceleratorTemplate,
    palette: &Palette,
    budget: usize,
    seed: u64,
) -> Result<Vec<ArchiveEntry>> {
    hill_climb_observed(estimators, target, template, palette, budget, seed, |_| {})
}

/// Non-dominated subset of `budget` uniform random configurations under
/// the estimated objectives, in draw order.
pub fn random_search(
    estimators: &Estimators,
    target: Target,
    template: &AcceleratorTemplate,
    palette: &Palette,
    budget: usize,
    seed: u64,
) -> Result<Vec<ArchiveEntry>> {
    let scorer = Scorer {
        estimators,
        target,
        template,
        palette,
    };
    let mut seen = HashSet::new();
    let mut entries = Vec::new();
    for c in sample_random(budget, template, palette, seed) {
        if seen.insert(c.clone()) {
            entries.push(scorer.entry(c)?);
        }
    }
    Ok(entries
        .iter()
        .filter(|e| !entries.iter().any(|o| dominates(&o.objectives, &e.objectives)))
        .cloned()
        .collect())
}

/// A front verified by exact evaluation.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FinalFront {
    pub target: Target,
    /// Exact results for every archive member.
    pub evaluated: Vec<EvaluatedConfig>,
    /// (1 − SSIM, cost) front; point ids are configuration strings.
    pub front: Front,
}

impl FinalFront {
    pub fn front_configs(&self) -> Vec<&EvaluatedConfig> {
        let ids: HashSet<&str> = self.front.ids().collect();
        self.evaluated
            .iter()
            .filter(|e| ids.contains(e.config.to_string().as_str()))
            .collect()
    }
}

pub fn exact_point(e: &EvaluatedConfig, target: Target) -> Point {
    Point::new(e.config.to_string(), vec![1.0 - e.ssim, cost_value(target, &e.cost)])
}

/// Evaluates every archive member exactly and keeps the true front.
pub fn finalize(archive: &[ArchiveEntry], target: Target, evaluator: &Evaluator) -> Result<FinalFront> {
    if archive.is_empty() {
        return Err(Error::Empty("archive"));
    }
    let mut seen = HashSet::new();
    let configs: Vec<Configuration> = archive
        .iter()
        .filter(|e| seen.insert(e.config.clone()))
        .map(|e| e.config.clone())
        .collect();
    let evaluated = evaluator.evaluate_all(&configs)?;
    let points: Vec<Point> = evaluated.iter().map(|e| exact_point(e, target)).collect();
    let front = pareto_front(&points)?;
    Ok(FinalFront {
        target,
        evaluated,
        front,
    })
}

/// Shared reference for comparing fronts: 1.1 × the nadir of their union.
pub fn shared_reference(fronts: &[&Front]) -> Point {
    let mut nadir = [0.0f64; 2];
    for p in fronts.iter().flat_map(|f| &f.points) {
        for (n, &v) in nadir.iter_mut().zip(&p.objectives) {
            *n = n.max(v);
        }
    }
    Point::new(
        "reference",
        nadir.iter().map(|&v| if v > 0.0 { 1.1 * v } else { 1.0 }).collect(),
    )
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AutoaxConfig {
    /// Exactly evaluated random configurations used to fit the estimators.
    pub samples: usize,
    /// Estimator queries per search, beyond the hill climber's two seeds.
    pub budget: usize,
    pub seed: u64,
    pub targets: Vec<Target>,
    pub model: ModelKind,
    pub hyper: Hyper,
    pub train_fraction: f64,
}

impl Default for AutoaxConfig {
    fn default() -> Self {
        AutoaxConfig {
            samples: 500,
            budget: 2000,
            seed: 0,
            targets: Target::ALL.to_vec(),
            model: ModelKind::RandomForest,
            hyper: Hyper::new(),
            train_fraction: 0.8,
        }
    }
}

impl AutoaxConfig {
    pub fn validate(&self) -> Result<()> {
        if self.samples < MIN_ESTIMATOR_SAMPLES {
            return Err(Error::Config(format!(
                "samples must be at least {MIN_ESTIMATOR_SAMPLES}"
            )));
        }
        if self.budget == 0 {
            return Err(Error::Config("budget must be at least 1".into()));
        }
        if self.targets.is_empty() {
            return Err(Error::Config("no cost targets".into()));
        }
        if !(self.train_fraction > 0.0 && self.train_fraction < 1.0) {
            return Err(Error::Config(format!(
                "train_fraction {} not in (0, 1)",
                self.train_fraction
            )));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TargetComparison {
    pub target: Target,
    pub hill_climb_archive: Vec<ArchiveEntry>,
    pub random_archive: Vec<ArchiveEntry>,
    pub hill_climb: FinalFront,
    pub random: FinalFront,
    pub reference: Vec<f64>,
    pub hill_climb_hypervolume: f64,
    pub random_hypervolume: f64,
}

impl TargetComparison {
    pub fn hill_climb_wins(&self) -> bool {
        self.hill_climb_hypervolume >= self.random_hypervolume
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AutoaxReport {
    pub config: AutoaxConfig,
    pub template: AcceleratorTemplate,
    pub mult_palette: Vec<String>,
    pub add_palette: Vec<String>,
    pub design_space_size: f64,
    pub estimator_fidelity: BTreeMap<String, f64>,
    pub comparisons: Vec<TargetComparison>,
}

/// Samples and evaluates configurations, fits the estimators, then runs the
/// hill climber and random search per cost target with equal budgets and
/// compares their verified fronts by hypervolume.
pub fn run_autoax(evaluator: &Evaluator, cfg: &AutoaxConfig) -> Result<AutoaxReport> {
    cfg.validate()?;
    let (template, palette) = (evaluator.template(), evaluator.palette());
    let samples = sample_random(cfg.samples, template, palette, cfg.seed);
    let evaluated = evaluator.evaluate_all(&samples)?;
    let opts = EstimatorOptions {
        kind: cfg.model,
        hyper: cfg.hyper.clone(),
        train_fraction: cfg.train_fraction,
        seed: cfg.seed,
    };
    let estimators = fit_estimators(&evaluated, template, palette, &cfg.targets, &opts)?;
    let mut comparisons = Vec::new();
    for (i, &target) in cfg.targets.iter().enumerate() {
        let stream = cfg.seed.wrapping_mul(0x9E37_79B9_7F4A_7C15).wrapping_add(i as u64 + 1);
        let hc_archive = hill_climb(&estimators, target, template, palette, cfg.budget, stream)?;
        let rs_archive = random_search(&estimators, target, template, palette, cfg.budget, stream ^ 0x5555)?;
        let hc = finalize(&hc_archive, target, evaluator)?;
        let rs = finalize(&rs_archive, target, evaluator)?;
        let reference = shared_reference(&[&hc.front, &rs.front]);
        let hv_hc = hypervolume2d(&hc.front, &reference)?;
        let hv_rs = hypervolume2d(&rs.front, &reference)?;
        log::info!("{target}: hill climb hv {hv_hc:.6}, random search hv {hv_rs:.6}");
        comparisons.push(TargetComparison {
            target,
            hill_climb_archive: hc_archive,
            random_archive: rs_archive,
            hill_climb: hc,
            random: rs,
            reference: reference.objectives,
            hill_climb_hypervolume: hv_hc,
            random_hypervolume: hv_rs,
        });
    }
    Ok(AutoaxReport {
        config: cfg.clone(),
        template: template.clone(),
        mult_palette: palette.mult().iter().map(|c| c.id.clone()).collect(),
        add_palette: palette.add().iter().map(|c| c.id.clone()).collect(),
        design_space_size: palette.design_space_size(),
        estimator_fidelity: estimators.fidelities(),
        comparisons,
    })
}
