// SPDX-License-Identifier: Apache-2.0

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::sim::{
    check_exhaustive, exhaustive_block_inputs, exhaustive_layout, pack_lanes, unpack_lanes, Combinational,
};
use crate::error::{Error, Result};

/// Error characterization of an approximate circuit against its exact reference.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct ErrorReport {
    /// Mean absolute error distance in output units.
    pub med_raw: f64,
    /// `med_raw / (2^m - 1) * 100` for an `m`-bit output.
    pub med_norm_pct: f64,
    pub worst_case: f64,
    pub error_rate: f64,
}

impl ErrorReport {
    pub fn is_exact(&self) -> bool {
        self.error_rate == 0.0
    }
}

#[derive(Default, Clone, Copy)]
struct Tally {
    abs_sum: u128,
    worst: u64,
    wrong: u64,
}

impl Tally {
    fn merge(self, o: Tally) -> Tally {
        Tally {
            abs_sum: self.abs_sum + o.abs_sum,
            worst: self.worst.max(o.worst),
            wrong: self.wrong + o.wrong,
        }
    }

    fn add_lanes(&mut self, a: &[u64; 64], b: &[u64; 64], lanes: usize) {
        for j in 0..lanes {
            let d = a[j].abs_diff(b[j]);
            if d != 0 {
                self.abs_sum += d as u128;
                self.worst = self.worst.max(d);
                self.wrong += 1;
            }
        }
    }

    fn report(self, samples: f64, output_bits: usize) -> ErrorReport {
        let med_raw = self.abs_sum as f64 / samples;
        let max_out = if output_bits >= 64 {
            u64::MAX as f64
        } else {
            ((1u64 << output_bits) - 1) as f64
        };
        ErrorReport {
            med_raw,
            med_norm_pct: med_raw / max_out * 100.0,
            worst_case: self.worst as f64,
            error_rate: self.wrong as f64 / samples,
        }
    }
}

fn check_widths<A, B>(approx: &A, exact: &B) -> Result<()>
where
    A: Combinational + ?Sized,
    B: Combinational + ?Sized,
{
    if approx.input_bits() != exact.input_bits() || approx.output_bits() != exact.output_bits() {
        return Err(Error::WidthMismatch(format!(
            "approximate {}→{} bits vs exact {}→{} bits",
            approx.input_bits(),
            approx.output_bits(),
            exact.input_bits(),
            exact.output_bits()
        )));
    }
    Ok(())
}

/// Exhaustive error metrics over all `2^n` input words.
pub fn error_metrics<A, B>(approx: &A, exact: &B) -> Result<ErrorReport>
where
    A: Combinational + ?Sized,
    B: Combinational + ?Sized,
{
    check_widths(approx, exact)?;
    let bits = approx.input_bits();
    check_exhaustive(bits)?;
    let (blocks, mask) = exhaustive_layout(bits);
    let lanes = mask.count_ones() as usize;
    let tally = (0..blocks)
        .into_par_iter()
        .fold(
            || (Tally::default(), Vec::new(), Vec::new(), Vec::new()),
            |(mut t, mut inputs, mut oa, mut ob), blk| {
                exhaustive_block_inputs(bits, blk, &mut inputs);
                approx.eval_block(&inputs, &mut oa);
                exact.eval_block(&inputs, &mut ob);
                if oa.iter().zip(&ob).any(|(x, y)| (x ^ y) & mask != 0) {
                    let (mut la, mut lb) = ([0u64; 64], [0u64; 64]);
                    unpack_lanes(&oa, &mut la);
                    unpack_lanes(&ob, &mut lb);
                    t.add_lanes(&la, &lb, lanes);
                }
                (t, inputs, oa, ob)
            },
        )
        .map(|(t, ..)| t)
        .reduce(Tally::default, Tally::merge);
    Ok(tally.report((1u64 << bits) as f64, approx.output_bits()))
}

/// Monte-Carlo estimate of the same metrics from `samples` uniform input words,
/// for circuits wider than the exhaustive limit.
pub fn error_metrics_sampled<A, B>(approx: &A, exact: &B, samples: usize, seed: u64) -> Result<ErrorReport>
where
    A: Combinational + ?Sized,
    B: Combinational + ?Sized,
{
    check_widths(approx, exact)?;
    if samples == 0 {
        return Err(Error::out_of_range("sample count", 0));
    }
    let bits = approx.input_bits();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let range_mask = if bits >= 64 { !0 } else { (1u64 << bits) - 1 };
    let mut tally = Tally::default();
    let (mut inputs, mut oa, mut ob) = (Vec::new(), Vec::new(), Vec::new());
    let mut remaining = samples;
    while remaining > 0 {
        let lanes = remaining.min(64);
        let words: Vec<u64> = (0..lanes).map(|_| rng.gen::<u64>() & range_mask).collect();
        pack_lanes(&words, bits, &mut inputs);
        approx.eval_block(&inputs, &mut oa);
        exact.eval_block(&inputs, &mut ob);
        let (mut la, mut lb) = ([0u64; 64], [0u64; 64]);
        unpack_lanes(&oa, &mut la);
        unpack_lanes(&ob, &mut lb);
        tally.add_lanes(&la, &lb, lanes);
        remaining -= lanes;
    }
    Ok(tally.report(samples as f64, approx.output_bits()))
}
