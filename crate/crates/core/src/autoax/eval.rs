// SPDX-License-Identifier: Apache-2.0

use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::image::GrayImage;
use super::palette::{Palette, ADD_WIDTH};
use super::ssim::{ssim, SSIM_WINDOW};
use super::template::{reference_filter, AcceleratorTemplate, Role, TemplateNode, ADD_MAX};
use crate::circuit::{pack_lanes, truth_table, unpack_lanes, Combinational};
use crate::cost::FpgaCost;
use crate::error::{Error, Result};

/// Palette index per template node, written as dash-separated indices.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct Configuration(pub Vec<usize>);

impl Configuration {
    /// Every node on palette index 0, the exact component.
    pub fn exact(template: &AcceleratorTemplate) -> Self {
        Configuration(vec![0; template.nodes.len()])
    }

    pub fn validate(&self, template: &AcceleratorTemplate, palette: &Palette) -> Result<()> {
        if self.0.len() != template.nodes.len() {
            return Err(Error::Dimension {
                expected: template.nodes.len(),
                found: self.0.len(),
            });
        }
        for (node, &idx) in self.0.iter().enumerate() {
            let size = palette.role(template.role(node)).len();
            if idx >= size {
                return Err(Error::Config(format!(
                    "node {node} uses palette index {idx}, but its palette has {size} components"
                )));
            }
        }
        Ok(())
    }
}

impl fmt::Display for Configuration {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(|i| i.to_string()).collect();
        f.write_str(&parts.join("-"))
    }
}

impl FromStr for Configuration {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        s.split('-')
            .map(|p| {
                p.trim()
                    .parse::<usize>()
                    .map_err(|_| Error::Data(format!("bad configuration `{s}`")))
            })
            .collect::<Result<Vec<_>>>()
            .map(Configuration)
    }
}

impl TryFrom<String> for Configuration {
    type Error = Error;

    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<Configuration> for String {
    fn from(c: Configuration) -> String {
        c.to_string()
    }
}

/// Uniform i.i.d. palette choices per node.
pub fn sample_random(n: usize, template: &AcceleratorTemplate, palette: &Palette, seed: u64) -> Vec<Configuration> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n).map(|_| random_config(&mut rng, template, palette)).collect()
}

pub(crate) fn random_config(rng: &mut ChaCha8Rng, template: &AcceleratorTemplate, palette: &Palette) -> Configuration {
    Configuration(
        (0..template.nodes.len())
            .map(|node| rng.gen_range(0..palette.role(template.role(node)).len()))
            .collect(),
    )
}

/// Accelerator cost: LUTs and power add up, latency follows the longest path.
pub fn aggregate_cost(config: &Configuration, template: &AcceleratorTemplate, palette: &Palette) -> Result<FpgaCost> {
    config.validate(template, palette)?;
    let cost = |node: usize| &palette.role(template.role(node))[config.0[node]].cost;
    let nodes = 0..template.nodes.len();
    Ok(FpgaCost {
        luts: nodes.clone().map(|n| cost(n).luts).sum(),
        power_mw: nodes.map(|n| cost(n).power_mw).sum(),
        latency_ns: template.longest_path(|n| cost(n).latency_ns),
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EvaluatedConfig {
    pub config: Configuration,
    pub ssim: f64,
    pub cost: FpgaCost,
}

/// Runs configurations of one template and palette on a fixed image set.
pub struct Evaluator<'a> {
    template: &'a AcceleratorTemplate,
    palette: &'a Palette,
    /// Product for every (pixel, coefficient) word, per multiplier component.
    mult_tables: Vec<Vec<u16>>,
    images: Vec<GrayImage>,
    references: Vec<GrayImage>,
}

impl<'a> Evaluator<'a> {
    pub fn new(template: &'a AcceleratorTemplate, palette: &'a Palette, images: Vec<GrayImage>) -> Result<Self> {
        if images.is_empty() {
            return Err(Error::Empty("image set"));
        }
        if let Some(img) = images
            .iter()
            .find(|i| i.width() < SSIM_WINDOW || i.height() < SSIM_WINDOW)
        {
            return Err(Error::Image(format!(
                "{}x{} image is smaller than the {SSIM_WINDOW}x{SSIM_WINDOW} SSIM window",
                img.width(),
                img.height()
            )));
        }
        let mult_tables = palette
            .mult()
            .iter()
            .map(|c| Ok(truth_table(&c.netlist)?.into_iter().map(|v| v as u16).collect()))
            .collect::<Result<Vec<Vec<u16>>>>()?;
        let references = images
            .iter()
            .map(|img| reference_filter(img, &template.kernel, template.shift))
            .collect();
        Ok(Evaluator {
            template,
            palette,
            mult_tables,
            images,
            references,
        })
    }

    pub fn template(&self) -> &AcceleratorTemplate {
        self.template
    }

    pub fn palette(&self) -> &Palette {
        self.palette
    }

    pub fn images(&self) -> &[GrayImage] {
        &self.images
    }

    /// Exact integer filter outputs the approximate outputs are scored against.
    pub fn references(&self) -> &[GrayImage] {
        &self.references
    }

    /// Filter output of `config` on `image`, node by node over all pixels.
    pub fn filter(&self, config: &Configuration, image: &GrayImage) -> Result<GrayImage> {
        config.validate(self.template, self.palette)?;
        let (w, h) = (image.width(), image.height());
        let n = w * h;
        let mut values: Vec<Vec<u64>> = Vec::with_capacity(self.template.nodes.len());
        let mut words = Vec::new();
        let mut outs = Vec::new();
        let mut lanes = [0u64; 64];
        for (node, spec) in self.template.nodes.iter().enumerate() {
            let idx = config.0[node];
            let v = match *spec {
                TemplateNode::Mult { tap, coefficient } => {
                    let table = &self.mult_tables[idx];
                    let (dx, dy) = ((tap % 3) as isize - 1, (tap / 3) as isize - 1);
                    let mut v = Vec::with_capacity(n);
                    for y in 0..h as isize {
                        for x in 0..w as isize {
                            let p = image.get_clamped(x + dx, y + dy) as usize;
                            v.push(table[p | (coefficient as usize) << 8] as u64);
                        }
                    }
                    v
                }
                TemplateNode::Add { left, right } => {
                    let adder = &self.palette.role(Role::Add)[idx].netlist;
                    let mut v = Vec::with_capacity(n);
                    let mut packed = [0u64; 64];
                    for start in (0..n).step_by(64) {
                        let end = (start + 64).min(n);
                        for (j, i) in (start..end).enumerate() {
                            packed[j] = values[left][i] | values[right][i] << ADD_WIDTH;
                        }
                        pack_lanes(&packed[..end - start], 2 * ADD_WIDTH, &mut words);
                        adder.eval_block(&words, &mut outs);
                        unpack_lanes(&outs, &mut lanes);
                        v.extend(lanes[..end - start].iter().map(|&s| s.min(ADD_MAX)));
                    }
                    v
                }
            };
            values.push(v);
        }
        let root = &values[self.template.root()];
        let pixels = root
            .iter()
            .map(|&s| (s >> self.template.shift).min(255) as u8)
            .collect();
        GrayImage::new(w, h, pixels)
    }

    /// Mean SSIM against the exact outputs, plus the aggregated cost.
    pub fn evaluate(&self, config: &Configuration) -> Result<EvaluatedConfig> {
        let cost = aggregate_cost(config, self.template, self.palette)?;
        let mut total = 0.0;
        for (img, reference) in self.images.iter().zip(&self.references) {
            total += ssim(&self.filter(config, img)?, reference)?;
        }
        Ok(EvaluatedConfig {
            config: config.clone(),
            ssim: total / self.images.len() as f64,
            cost,
        })
    }

    pub fn evaluate_all(&self, configs: &[Configuration]) -> Result<Vec<EvaluatedConfig>> {
        configs.par_iter().map(|c| self.evaluate(c)).collect()
    }
}
