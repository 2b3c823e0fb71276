// SPDX-License-Identifier: Apache-2.0

//! Component palettes: the exact 8×8 multiplier and 16-bit adder plus a
//! spread of Pareto-optimal approximate variants of each.

use std::collections::HashSet;
use std::fs;
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::template::Role;
use crate::circuit::{build_exact_adder, build_exact_multiplier, gen_library, parse_netlist, Netlist, Signal};
use crate::cost::{measure, measure_sampled, FpgaCost, Measurement, OracleConfig, DEFAULT_LUT_K};
use crate::error::{Error, Result};
use crate::pareto::{peel_fronts, Point};

pub const PALETTE_FILE: &str = "palette.json";
pub const MULT_WIDTH: usize = 8;
pub const ADD_WIDTH: usize = 16;

#[derive(Clone, Debug)]
pub struct Component {
    pub id: String,
    pub netlist: Netlist,
    pub cost: FpgaCost,
    pub med_norm_pct: f64,
}

impl Component {
    pub fn from_measurement(netlist: Netlist, m: &Measurement) -> Self {
        Component {
            id: netlist.name().to_string(),
            netlist,
            cost: m.fpga,
            med_norm_pct: m.error.med_norm_pct,
        }
    }
}

/// Per-role component lists; index 0 of each is the exact circuit.
#[derive(Clone, Debug)]
pub struct Palette {
    mult: Vec<Component>,
    add: Vec<Component>,
}

fn check_role(role: Role, list: &[Component], ids: &mut HashSet<String>) -> Result<()> {
    if list.is_empty() {
        return Err(Error::Config(format!("{role:?} palette is empty")));
    }
    let (ins, outs) = match role {
        Role::Mult => (2 * MULT_WIDTH, 2 * MULT_WIDTH),
        Role::Add => (2 * ADD_WIDTH, ADD_WIDTH + 1),
    };
    for c in list {
        if (c.netlist.n_inputs(), c.netlist.n_outputs()) != (ins, outs) {
            return Err(Error::WidthMismatch(format!(
                "{role:?} component `{}` has {}/{} inputs/outputs, expected {ins}/{outs}",
                c.id,
                c.netlist.n_inputs(),
                c.netlist.n_outputs()
            )));
        }
        if !ids.insert(c.id.clone()) {
            return Err(Error::DuplicateId(c.id.clone()));
        }
    }
    Ok(())
}

impl Palette {
    pub fn new(mult: Vec<Component>, add: Vec<Component>) -> Result<Self> {
        let mut ids = HashSet::new();
        check_role(Role::Mult, &mult, &mut ids)?;
        check_role(Role::Add, &add, &mut ids)?;
        Ok(Palette { mult, add })
    }

    pub fn role(&self, role: Role) -> &[Component] {
        match role {
            Role::Mult => &self.mult,
            Role::Add => &self.add,
        }
    }

    pub fn mult(&self) -> &[Component] {
        &self.mult
    }

    pub fn add(&self) -> &[Component] {
        &self.add
    }

    /// Number of configurations of the 17-node template.
    pub fn design_space_size(&self) -> f64 {
        (self.mult.len() as f64).powi(9) * (self.add.len() as f64).powi(8)
    }

    pub fn write(&self, dir: &Path) -> Result<()> {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        let mut manifest = PaletteManifest::default();
        for (list, entries) in [(&self.mult, &mut manifest.mult), (&self.add, &mut manifest.add)] {
            for c in list {
                let file = format!("{}.net", c.id);
                let p = dir.join(&file);
                fs::write(&p, c.netlist.to_text()).map_err(|e| Error::io(&p, e))?;
                entries.push(ManifestEntry {
                    id: c.id.clone(),
                    file,
                    cost: c.cost,
                    med_norm_pct: c.med_norm_pct,
                });
            }
        }
        let p = dir.join(PALETTE_FILE);
        fs::write(&p, serde_json::to_string_pretty(&manifest)?).map_err(|e| Error::io(&p, e))
    }

    pub fn read(dir: &Path) -> Result<Self> {
        let p = dir.join(PALETTE_FILE);
        let text = fs::read_to_string(&p).map_err(|e| Error::io(&p, e))?;
        let manifest: PaletteManifest = serde_json::from_str(&text)?;
        let load = |entries: Vec<ManifestEntry>| -> Result<Vec<Component>> {
            entries
                .into_iter()
                .map(|e| {
                    let p = dir.join(&e.file);
                    let text = fs::read_to_string(&p).map_err(|err| Error::io(&p, err))?;
                    let mut netlist = parse_netlist(&text)?;
                    netlist.set_name(e.id.clone());
                    Ok(Component {
                        id: e.id,
                        netlist,
                        cost: e.cost,
                        med_norm_pct: e.med_norm_pct,
                    })
                })
                .collect()
        };
        Palette::new(load(manifest.mult)?, load(manifest.add)?)
    }
}

#[derive(Default, Serialize, Deserialize)]
struct PaletteManifest {
    mult: Vec<ManifestEntry>,
    add: Vec<ManifestEntry>,
}

#[derive(Serialize, Deserialize)]
struct ManifestEntry {
    id: String,
    file: String,
    cost: FpgaCost,
    med_norm_pct: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PaletteOptions {
    /// Palette sizes including the exact component.
    pub mult_size: usize,
    pub add_size: usize,
    /// Variants generated per role before selection.
    pub library_size: usize,
    pub seed: u64,
    pub lut_k: usize,
    /// Random words for the adders' sampled error metrics.
    pub error_samples: usize,
    /// Variants above this mean error are not considered.
    pub max_med_norm_pct: f64,
    /// Also consider the exact circuit with its 1..=n output LSBs tied to zero.
    pub truncations: usize,
    pub oracle: OracleConfig,
}

impl Default for PaletteOptions {
    fn default() -> Self {
        PaletteOptions {
            mult_size: 9,
            add_size: 8,
            library_size: 300,
            seed: 0,
            lut_k: DEFAULT_LUT_K,
            error_samples: 100_000,
            max_med_norm_pct: f64::INFINITY,
            truncations: 8,
            oracle: OracleConfig::default(),
        }
    }
}

/// Picks `count` approximate variants spread evenly along the peeled
/// (med_norm_pct, luts) fronts, lowest error first. Zero-error variants are
/// skipped because the exact component already covers them.
pub fn select_spread(measurements: &[Measurement], count: usize, max_med_norm_pct: f64) -> Result<Vec<usize>> {
    if count == 0 {
        return Ok(Vec::new());
    }
    let points: Vec<Point> = measurements
        .iter()
        .enumerate()
        .filter(|(_, m)| m.error.med_norm_pct > 0.0 && m.error.med_norm_pct <= max_med_norm_pct)
        .map(|(i, m)| Point::new(i.to_string(), vec![m.error.med_norm_pct, m.fpga.luts as f64]))
        .collect();
    if points.is_empty() {
        return Ok(Vec::new());
    }
    let fronts = peel_fronts(&points, points.len())?;
    let mut pool: Vec<usize> = Vec::new();
    for f in &fronts {
        if pool.len() >= count {
            break;
        }
        pool.extend(f.points.iter().map(|p| p.id.parse::<usize>().expect("index ids")));
    }
    pool.sort_by(|&a, &b| {
        let (ma, mb) = (&measurements[a], &measurements[b]);
        ma.error
            .med_norm_pct
            .total_cmp(&mb.error.med_norm_pct)
            .then(ma.fpga.luts.cmp(&mb.fpga.luts))
            .then(a.cmp(&b))
    });
    if pool.len() <= count {
        return Ok(pool);
    }
    let last = (pool.len() - 1) as f64;
    let picks: Vec<usize> = if count == 1 {
        vec![pool[0]]
    } else {
        (0..count)
            .map(|i| pool[(i as f64 * last / (count - 1) as f64).round() as usize])
            .collect()
    };
    Ok(picks)
}

/// `base` with its `k` least significant outputs tied to zero and the logic
/// that only fed them removed.
pub fn truncate_lsbs(base: &Netlist, k: usize) -> Netlist {
    let mut t = base.clone();
    for o in t.outputs_mut().iter_mut().take(k) {
        *o = Signal::Const(false);
    }
    let mut t = t.sweep_dead();
    t.set_name(format!("{}_t{k:02}", base.name()));
    t
}

fn role_palette(role: Role, size: usize, opts: &PaletteOptions, seed: u64) -> Result<Vec<Component>> {
    let exact = match role {
        Role::Mult => build_exact_multiplier(MULT_WIDTH)?,
        Role::Add => build_exact_adder(ADD_WIDTH)?,
    };
    let mut library = gen_library(&exact, opts.library_size.max(1), seed);
    let max_k = opts.truncations.min(exact.n_outputs().saturating_sub(1));
    library.extend((1..=max_k).map(|k| truncate_lsbs(&exact, k)));
    let measurements: Vec<Measurement> = library
        .par_iter()
        .map(|n| match role {
            Role::Mult => measure(n, &exact, opts.lut_k, &opts.oracle),
            Role::Add => measure_sampled(n, &exact, opts.lut_k, &opts.oracle, opts.error_samples, seed),
        })
        .collect::<Result<_>>()?;
    // Element 0 of the library is the base circuit itself.
    let mut out = vec![Component::from_measurement(library[0].clone(), &measurements[0])];
    let picks = select_spread(&measurements[1..], size.saturating_sub(1), opts.max_med_norm_pct)?;
    if picks.len() + 1 < size {
        log::warn!(
            "{role:?} palette has {} of {size} requested components",
            picks.len() + 1
        );
    }
    out.extend(
        picks
            .into_iter()
            .map(|i| Component::from_measurement(library[i + 1].clone(), &measurements[i + 1])),
    );
    Ok(out)
}

/// Generates, measures and selects both palettes.
pub fn build_palette(opts: &PaletteOptions) -> Result<Palette> {
    if opts.mult_size == 0 || opts.add_size == 0 {
        return Err(Error::Config("palette sizes must be at least 1".into()));
    }
    let mult = role_palette(Role::Mult, opts.mult_size, opts, opts.seed)?;
    let add = role_palette(Role::Add, opts.add_size, opts, opts.seed.wrapping_add(1))?;
    Palette::new(mult, add)
}
