// SPDX-License-Identifier: Apache-2.0

//! Synthetic libraries of approximate variants and their on-disk manifest.

use std::collections::HashSet;
use std::fs;
use std::path::{Path, PathBuf};

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::netlist::{GateType, Netlist, Signal};
use super::parse::parse_netlist;
use crate::error::{Error, Result};

/// Relative weights of the mutation operators.
const P_TRUNCATE: f64 = 0.4;
const P_CONSTANT: f64 = 0.3;
const P_SUBSTITUTE: f64 = 0.2;
// The remaining 0.1 is subtree pruning.

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Mutation {
    Truncate,
    Constant,
    Substitute,
    Prune,
}

fn pick_mutation(rng: &mut ChaCha8Rng) -> Mutation {
    let r: f64 = rng.gen();
    if r < P_TRUNCATE {
        Mutation::Truncate
    } else if r < P_TRUNCATE + P_CONSTANT {
        Mutation::Constant
    } else if r < P_TRUNCATE + P_CONSTANT + P_SUBSTITUTE {
        Mutation::Substitute
    } else {
        Mutation::Prune
    }
}

/// Applies one mutation; `None` when the operator has nothing to act on.
fn mutate(parent: &Netlist, op: Mutation, rng: &mut ChaCha8Rng) -> Option<Netlist> {
    let mut child = parent.clone();
    let live: Vec<usize> = parent
        .live_gates()
        .iter()
        .enumerate()
        .filter(|&(i, &l)| l && !parent.gates()[i].kind.is_const())
        .map(|(i, _)| i)
        .collect();
    match op {
        Mutation::Truncate => {
            // Bind the lowest output that is not yet tied to CONST0.
            let k = child.outputs().iter().position(|s| *s != Signal::Const(false))?;
            child.outputs_mut()[k] = Signal::Const(false);
        }
        Mutation::Constant => {
            let &g = pick(&live, rng)?;
            let gate = &mut child.gates_mut()[g];
            gate.kind = if rng.gen_bool(0.5) {
                GateType::Const1
            } else {
                GateType::Const0
            };
            gate.fanin.clear();
        }
        Mutation::Substitute => {
            let eligible: Vec<usize> = live
                .iter()
                .copied()
                .filter(|&g| matches!(parent.gates()[g].kind, GateType::Xor | GateType::Or | GateType::And))
                .collect();
            let &g = pick(&eligible, rng)?;
            let gate = &mut child.gates_mut()[g];
            match gate.kind {
                GateType::Xor => gate.kind = GateType::Or,
                GateType::Or => gate.kind = GateType::Xor,
                GateType::And => {
                    gate.kind = GateType::Buf;
                    gate.fanin.truncate(1);
                }
                _ => unreachable!(),
            }
        }
        Mutation::Prune => {
            // Tie a gate to zero and drop the logic that only fed it.
            let &g = pick(&live, rng)?;
            let gate = &mut child.gates_mut()[g];
            gate.kind = GateType::Const0;
            gate.fanin.clear();
            child = child.sweep_dead();
        }
    }
    Some(child)
}

fn pick<'a, T>(items: &'a [T], rng: &mut ChaCha8Rng) -> Option<&'a T> {
    if items.is_empty() {
        None
    } else {
        Some(&items[rng.gen_range(0..items.len())])
    }
}

/// Generates `count` structurally distinct variants of `base`; element 0 is `base` itself.
///
/// Each new variant applies one to three mutations to a uniformly chosen earlier
/// member, so errors compound along lineages. Mutations that leave no output
/// depending on an input, or that reproduce an existing structure, are resampled.
/// For very small bases the space of distinct variants can run out, in which case
/// fewer than `count` circuits are returned.
pub fn gen_library(base: &Netlist, count: usize, seed: u64) -> Vec<Netlist> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut library = vec![base.clone()];
    let mut seen: HashSet<String> = HashSet::new();
    seen.insert(structure_key(base));
    let max_attempts = 200 * count.max(1) + 1000;
    let mut attempts = 0;
    while library.len() < count && attempts < max_attempts {
        attempts += 1;
        let parent = &library[rng.gen_range(0..library.len())];
        let steps = rng.gen_range(1..=3);
        let mut child = parent.clone();
        let mut ok = true;
        for _ in 0..steps {
            let op = pick_mutation(&mut rng);
            match mutate(&child, op, &mut rng) {
                Some(c) if c.has_input_dependent_output() => child = c,
                _ => {
                    ok = false;
                    break;
                }
            }
        }
        if !ok || !seen.insert(structure_key(&child)) {
            continue;
        }
        child.set_name(format!("{}_v{:04}", base.name(), library.len()));
        library.push(child);
    }
    if library.len() < count {
        log::warn!(
            "library for `{}` exhausted after {} distinct variants",
            base.name(),
            library.len()
        );
    }
    library
}

fn structure_key(n: &Netlist) -> String {
    let mut key = String::new();
    for g in n.gates() {
        key.push_str(g.kind.name());
        for s in &g.fanin {
            key.push_str(&format!(" {s:?}"));
        }
        key.push(';');
    }
    key.push_str(&format!("{:?}", n.outputs()));
    key
}

/// One manifest entry: a netlist stored next to the manifest or inlined.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ManifestEntry {
    pub id: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub path: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub netlist: Option<String>,
}

pub const MANIFEST_FILE: &str = "manifest.json";
pub const EXACT_FILE: &str = "exact.net";

/// A library directory: `manifest.json`, one `.net` file per circuit, and `exact.net`.
#[derive(Clone, Debug)]
pub struct Library {
    pub exact: Netlist,
    pub circuits: Vec<Netlist>,
}

impl Library {
    pub fn write(&self, dir: &Path) -> Result<()> {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        let write = |name: &str, text: String| -> Result<()> {
            let p = dir.join(name);
            fs::write(&p, text).map_err(|e| Error::io(p, e))
        };
        write(EXACT_FILE, self.exact.to_text())?;
        let mut manifest = Vec::with_capacity(self.circuits.len());
        for c in &self.circuits {
            let file = format!("{}.net", c.name());
            write(&file, c.to_text())?;
            manifest.push(ManifestEntry {
                id: c.name().to_string(),
                path: Some(file.into()),
                netlist: None,
            });
        }
        write(MANIFEST_FILE, serde_json::to_string_pretty(&manifest)?)
    }

    pub fn read(dir: &Path) -> Result<Library> {
        let read = |p: PathBuf| fs::read_to_string(&p).map_err(|e| Error::io(p, e));
        let exact = parse_netlist(&read(dir.join(EXACT_FILE))?)?;
        let manifest: Vec<ManifestEntry> = serde_json::from_str(&read(dir.join(MANIFEST_FILE))?)?;
        let mut ids = HashSet::new();
        let mut circuits = Vec::with_capacity(manifest.len());
        for entry in manifest {
            if !ids.insert(entry.id.clone()) {
                return Err(Error::DuplicateId(entry.id));
            }
            let text = match (&entry.netlist, &entry.path) {
                (Some(inline), _) => inline.clone(),
                (None, Some(p)) => read(dir.join(p))?,
                (None, None) => {
                    return Err(Error::Data(format!(
                        "manifest entry `{}` has neither path nor netlist",
                        entry.id
                    )))
                }
            };
            let mut n = parse_netlist(&text)?;
            n.set_name(entry.id);
            circuits.push(n);
        }
        Ok(Library { exact, circuits })
    }
}
