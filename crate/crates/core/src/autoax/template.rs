// SPDX-License-Identifier: Apache-2.0

//! The 3×3 convolution accelerator: nine multipliers feeding a balanced
//! adder tree, followed by a shift that divides by the kernel sum.

use serde::{Deserialize, Serialize};

use super::image::GrayImage;
use crate::error::{Error, Result};

pub const N_MULT: usize = 9;
pub const N_ADD: usize = 8;
pub const N_NODES: usize = N_MULT + N_ADD;
/// Adder node outputs saturate at this value.
pub const ADD_MAX: u64 = 0xFFFF;

pub type Kernel = [[u32; 3]; 3];

pub const GAUSSIAN_KERNEL: Kernel = [[1, 2, 1], [2, 4, 2], [1, 2, 1]];

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "role", rename_all = "snake_case")]
pub enum TemplateNode {
    /// Multiplies the pixel at `tap` (row-major offset in the 3×3 window) by `coefficient`.
    Mult { tap: usize, coefficient: u32 },
    /// Adds the outputs of two earlier nodes.
    Add { left: usize, right: usize },
}

/// Node roles, as indexed by the configuration vector.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Role {
    Mult,
    Add,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AcceleratorTemplate {
    pub kernel: Kernel,
    pub shift: u32,
    pub nodes: Vec<TemplateNode>,
}

/// Node ids 0..9 are the multipliers in tap order, 9..17 the adders; the last
/// adder is the root.
pub fn build_template(kernel: Kernel) -> Result<AcceleratorTemplate> {
    let mut sum = 0u32;
    for &c in kernel.iter().flatten() {
        if c > 255 {
            return Err(Error::Config(format!("kernel coefficient {c} does not fit in 8 bits")));
        }
        sum += c;
    }
    if !sum.is_power_of_two() {
        return Err(Error::Config(format!("kernel sum {sum} is not a power of two")));
    }
    let mut nodes: Vec<TemplateNode> = (0..N_MULT)
        .map(|tap| TemplateNode::Mult {
            tap,
            coefficient: kernel[tap / 3][tap % 3],
        })
        .collect();
    let add = |left, right| TemplateNode::Add { left, right };
    nodes.extend([
        add(0, 1),
        add(2, 3),
        add(4, 5),
        add(6, 7),
        add(9, 10),
        add(11, 12),
        add(13, 14),
        add(15, 8),
    ]);
    Ok(AcceleratorTemplate {
        kernel,
        shift: sum.trailing_zeros(),
        nodes,
    })
}

impl AcceleratorTemplate {
    pub fn role(&self, node: usize) -> Role {
        match self.nodes[node] {
            TemplateNode::Mult { .. } => Role::Mult,
            TemplateNode::Add { .. } => Role::Add,
        }
    }

    pub fn root(&self) -> usize {
        self.nodes.len() - 1
    }

    /// Longest path from any leaf to the root, with `weight(node)` per node.
    pub fn longest_path(&self, weight: impl Fn(usize) -> f64) -> f64 {
        let mut arrival = vec![0.0; self.nodes.len()];
        for (i, n) in self.nodes.iter().enumerate() {
            let before = match *n {
                TemplateNode::Mult { .. } => 0.0,
                TemplateNode::Add { left, right } => f64::max(arrival[left], arrival[right]),
            };
            arrival[i] = before + weight(i);
        }
        arrival[self.root()]
    }
}

impl Default for AcceleratorTemplate {
    fn default() -> Self {
        build_template(GAUSSIAN_KERNEL).expect("the Gaussian kernel is valid")
    }
}

/// Integer convolution with edge clamping, `(Σ k·p) >> shift`, saturated to 255.
pub fn reference_filter(image: &GrayImage, kernel: &Kernel, shift: u32) -> GrayImage {
    let (w, h) = (image.width(), image.height());
    let mut out = Vec::with_capacity(w * h);
    for y in 0..h as isize {
        for x in 0..w as isize {
            let mut acc = 0u64;
            for (dy, row) in kernel.iter().enumerate() {
                for (dx, &k) in row.iter().enumerate() {
                    acc += k as u64 * image.get_clamped(x + dx as isize - 1, y + dy as isize - 1) as u64;
                }
            }
            out.push((acc >> shift).min(255) as u8);
        }
    }
    GrayImage::new(w, h, out).expect("same shape as the input")
}
