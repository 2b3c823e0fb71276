// SPDX-License-Identifier: Apache-2.0

//! Bit-parallel simulation: each `u64` word carries 64 independent input patterns.

use rayon::prelude::*;

use super::netlist::{Netlist, Signal};
use crate::error::{Error, Result};

/// Largest input width swept exhaustively.
pub const EXHAUSTIVE_LIMIT: usize = 24;

/// Anything that maps an LSB-first input word to an LSB-first output word.
pub trait Combinational: Sync {
    fn input_bits(&self) -> usize;
    fn output_bits(&self) -> usize;
    /// Evaluates 64 patterns at once. `inputs[i]` holds input bit `i` of every lane;
    /// `outputs` is overwritten with one word per output bit.
    fn eval_block(&self, inputs: &[u64], outputs: &mut Vec<u64>);

    fn eval_word(&self, word: u64) -> Result<u64> {
        let bits = self.input_bits();
        if bits < 64 && word >> bits != 0 {
            return Err(Error::InputOutOfRange { word, bits });
        }
        let inputs: Vec<u64> = (0..bits).map(|i| if word >> i & 1 == 1 { !0 } else { 0 }).collect();
        let mut out = Vec::new();
        self.eval_block(&inputs, &mut out);
        Ok(out.iter().enumerate().fold(0u64, |acc, (j, w)| acc | (w & 1) << j))
    }
}

impl Netlist {
    /// Values of every net (inputs first, then gates) for 64 patterns.
    pub fn eval_nets(&self, inputs: &[u64], nets: &mut Vec<u64>) {
        debug_assert_eq!(inputs.len(), self.n_inputs());
        nets.clear();
        nets.extend_from_slice(inputs);
        for g in self.gates() {
            let value = |i: usize| match g.fanin.get(i) {
                Some(Signal::Net(n)) => nets[n.0],
                Some(Signal::Const(true)) => !0,
                _ => 0,
            };
            let v = g.kind.eval(value(0), value(1));
            nets.push(v);
        }
    }

    /// Output word for a single input word; bit `i` of `word` drives input `i`.
    pub fn simulate(&self, word: u64) -> Result<u64> {
        self.eval_word(word)
    }
}

pub(crate) fn signal_word(s: Signal, nets: &[u64]) -> u64 {
    match s {
        Signal::Net(n) => nets[n.0],
        Signal::Const(true) => !0,
        Signal::Const(false) => 0,
    }
}

impl Combinational for Netlist {
    fn input_bits(&self) -> usize {
        self.n_inputs()
    }

    fn output_bits(&self) -> usize {
        self.n_outputs()
    }

    fn eval_block(&self, inputs: &[u64], outputs: &mut Vec<u64>) {
        let mut nets = Vec::with_capacity(self.net_count());
        self.eval_nets(inputs, &mut nets);
        outputs.clear();
        outputs.extend(self.outputs().iter().map(|&s| signal_word(s, &nets)));
    }
}

const LANE_MASKS: [u64; 6] = [
    0xAAAA_AAAA_AAAA_AAAA,
    0xCCCC_CCCC_CCCC_CCCC,
    0xF0F0_F0F0_F0F0_F0F0,
    0xFF00_FF00_FF00_FF00,
    0xFFFF_0000_FFFF_0000,
    0xFFFF_FFFF_0000_0000,
];

/// Input words of exhaustive block `block`: lane `j` carries pattern `64 * block + j`.
pub fn exhaustive_block_inputs(bits: usize, block: u64, inputs: &mut Vec<u64>) {
    inputs.clear();
    inputs.extend((0..bits).map(|i| {
        if i < 6 {
            LANE_MASKS[i]
        } else if block >> (i - 6) & 1 == 1 {
            !0
        } else {
            0
        }
    }));
}

/// Number of blocks and the lane mask of valid patterns within each block.
pub fn exhaustive_layout(bits: usize) -> (u64, u64) {
    if bits >= 6 {
        (1u64 << (bits - 6), !0)
    } else {
        (1, (1u64 << (1u64 << bits)) - 1)
    }
}

pub(crate) fn check_exhaustive(bits: usize) -> Result<()> {
    if bits > EXHAUSTIVE_LIMIT {
        Err(Error::InputSpaceTooLarge {
            bits,
            limit: EXHAUSTIVE_LIMIT,
        })
    } else {
        Ok(())
    }
}

/// Transposes bit-sliced output words into one integer per lane.
pub fn unpack_lanes(outputs: &[u64], lanes: &mut [u64; 64]) {
    lanes.fill(0);
    for (k, &w) in outputs.iter().enumerate() {
        let mut w = w;
        while w != 0 {
            let j = w.trailing_zeros() as usize;
            lanes[j] |= 1 << k;
            w &= w - 1;
        }
    }
}

/// Transposes one integer per lane into bit-sliced words of `bits` width.
pub fn pack_lanes(values: &[u64], bits: usize, words: &mut Vec<u64>) {
    words.clear();
    words.resize(bits, 0);
    for (j, &v) in values.iter().enumerate().take(64) {
        let mut v = v;
        while v != 0 {
            let k = v.trailing_zeros() as usize;
            if k < bits {
                words[k] |= 1 << j;
            }
            v &= v - 1;
        }
    }
}

/// Complete truth table: output word for every input word, in order.
pub fn truth_table<C: Combinational + ?Sized>(c: &C) -> Result<Vec<u64>> {
    let bits = c.input_bits();
    check_exhaustive(bits)?;
    let (blocks, mask) = exhaustive_layout(bits);
    let lanes_per_block = (mask.count_ones()) as usize;
    let chunks: Vec<Vec<u64>> = (0..blocks)
        .into_par_iter()
        .map_init(
            || (Vec::new(), Vec::new()),
            |(inputs, outputs), b| {
                exhaustive_block_inputs(bits, b, inputs);
                c.eval_block(inputs, outputs);
                let mut lanes = [0u64; 64];
                unpack_lanes(outputs, &mut lanes);
                lanes[..lanes_per_block].to_vec()
            },
        )
        .collect();
    Ok(chunks.concat())
}

/// True iff both circuits agree on every input word.
pub fn check_equivalence<A, B>(a: &A, b: &B) -> Result<bool>
where
    A: Combinational + ?Sized,
    B: Combinational + ?Sized,
{
    if a.input_bits() != b.input_bits() || a.output_bits() != b.output_bits() {
        return Err(Error::WidthMismatch(format!(
            "{}→{} vs {}→{} bits",
            a.input_bits(),
            a.output_bits(),
            b.input_bits(),
            b.output_bits()
        )));
    }
    let bits = a.input_bits();
    check_exhaustive(bits)?;
    let (blocks, mask) = exhaustive_layout(bits);
    let differs = (0..blocks).into_par_iter().any(|blk| {
        let mut inputs = Vec::new();
        let (mut oa, mut ob) = (Vec::new(), Vec::new());
        exhaustive_block_inputs(bits, blk, &mut inputs);
        a.eval_block(&inputs, &mut oa);
        b.eval_block(&inputs, &mut ob);
        oa.iter().zip(&ob).any(|(x, y)| (x ^ y) & mask != 0)
    });
    Ok(!differs)
}
