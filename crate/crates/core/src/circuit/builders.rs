// SPDX-License-Identifier: Apache-2.0

//! Exact reference arithmetic circuits.

use super::netlist::{GateType, Netlist, NetlistBuilder, Signal};
use crate::error::{Error, Result};

fn check_width(n: usize) -> Result<()> {
    if !(2..=16).contains(&n) {
        return Err(Error::out_of_range("bit-width", n));
    }
    Ok(())
}

fn half_adder(b: &mut NetlistBuilder, x: Signal, y: Signal) -> (Signal, Signal) {
    let s = b.gate(GateType::Xor, &[x, y]);
    let c = b.gate(GateType::And, &[x, y]);
    (s, c)
}

fn full_adder(b: &mut NetlistBuilder, x: Signal, y: Signal, cin: Signal) -> (Signal, Signal) {
    let t = b.gate(GateType::Xor, &[x, y]);
    let s = b.gate(GateType::Xor, &[t, cin]);
    let c1 = b.gate(GateType::And, &[x, y]);
    let c2 = b.gate(GateType::And, &[t, cin]);
    let c = b.gate(GateType::Or, &[c1, c2]);
    (s, c)
}

/// Ripple-carry sum of two LSB-first bit vectors of possibly different lengths.
fn ripple_add(b: &mut NetlistBuilder, x: &[Signal], y: &[Signal]) -> Vec<Signal> {
    let width = x.len().max(y.len());
    let mut sum = Vec::with_capacity(width + 1);
    let mut carry: Option<Signal> = None;
    for i in 0..width {
        let operands: Vec<Signal> = [x.get(i), y.get(i)].into_iter().flatten().copied().collect();
        let (s, c) = match (operands.as_slice(), carry) {
            ([p, q], Some(c)) => {
                let (s, c) = full_adder(b, *p, *q, c);
                (s, Some(c))
            }
            ([p, q], None) => {
                let (s, c) = half_adder(b, *p, *q);
                (s, Some(c))
            }
            ([p], Some(c)) => {
                let (s, c) = half_adder(b, *p, c);
                (s, Some(c))
            }
            ([p], None) => (*p, None),
            _ => unreachable!("at least one operand bit per position"),
        };
        sum.push(s);
        carry = c;
    }
    sum.extend(carry);
    sum
}

/// `n`-bit ripple-carry adder: inputs `a0..a{n-1} b0..b{n-1}`, `n+1` sum outputs.
pub fn build_exact_adder(n: usize) -> Result<Netlist> {
    check_width(n)?;
    let mut b = NetlistBuilder::new(format!("add{n}_exact"));
    let a = b.input_bus("a", n);
    let c = b.input_bus("b", n);
    let sum = ripple_add(&mut b, &a, &c);
    debug_assert_eq!(sum.len(), n + 1);
    b.build(sum)
}

/// `n`×`n` unsigned array multiplier: inputs `a0..a{n-1} b0..b{n-1}`, `2n` product outputs.
pub fn build_exact_multiplier(n: usize) -> Result<Netlist> {
    check_width(n)?;
    let mut b = NetlistBuilder::new(format!("mul{n}_exact"));
    let a = b.input_bus("a", n);
    let x = b.input_bus("b", n);
    let row = |b: &mut NetlistBuilder, i: usize| -> Vec<Signal> {
        (0..n).map(|j| b.gate(GateType::And, &[a[j], x[i]])).collect()
    };
    let mut product = Vec::with_capacity(2 * n);
    let mut acc = row(&mut b, 0);
    for i in 1..n {
        product.push(acc[0]);
        let pp = row(&mut b, i);
        acc = ripple_add(&mut b, &acc[1..], &pp);
    }
    product.extend(acc);
    debug_assert_eq!(product.len(), 2 * n);
    b.build(product)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::truth_table;

    #[test]
    fn small_examples() {
        let add = build_exact_adder(2).unwrap();
        assert_eq!(add.simulate(3 | 1 << 2).unwrap(), 4);
        let mul = build_exact_multiplier(4).unwrap();
        assert_eq!(mul.simulate(15 | 15 << 4).unwrap(), 225);
        let mul2 = build_exact_multiplier(2).unwrap();
        assert_eq!(mul2.simulate(0b1111).unwrap(), 9);
    }

    #[test]
    fn range_checks() {
        assert!(build_exact_adder(1).is_err());
        assert!(build_exact_multiplier(17).is_err());
        assert!(build_exact_adder(16).is_ok());
    }

    #[test]
    fn adders_match_integer_sum() {
        for n in 2..=8 {
            let add = build_exact_adder(n).unwrap();
            assert_eq!(add.n_outputs(), n + 1);
            let mask = (1u64 << n) - 1;
            for (w, out) in truth_table(&add).unwrap().into_iter().enumerate() {
                let w = w as u64;
                assert_eq!(out, (w & mask) + (w >> n), "n={n} w={w}");
            }
        }
    }

    #[test]
    fn multipliers_match_integer_product() {
        for n in 2..=6 {
            let mul = build_exact_multiplier(n).unwrap();
            assert_eq!(mul.n_outputs(), 2 * n);
            let mask = (1u64 << n) - 1;
            for (w, out) in truth_table(&mul).unwrap().into_iter().enumerate() {
                let w = w as u64;
                assert_eq!(out, (w & mask) * (w >> n));
            }
        }
    }

    #[test]
    fn wide_builders_spot_check() {
        let add = build_exact_adder(16).unwrap();
        assert_eq!(add.simulate(0xFFFF | 0xFFFF << 16).unwrap(), 0x1FFFE);
        let mul = build_exact_multiplier(16).unwrap();
        assert_eq!(mul.simulate(0xFFFF | 0xFFFF << 16).unwrap(), 0xFFFF * 0xFFFF);
        assert_eq!(mul.simulate(1234 | 4321 << 16).unwrap(), 1234 * 4321);
    }
}
