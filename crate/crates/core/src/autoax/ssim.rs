// SPDX-License-Identifier: Apache-2.0

use super::image::GrayImage;
use crate::error::{Error, Result};

pub const SSIM_WINDOW: usize = 8;
const L: f64 = 255.0;
const C1: f64 = (0.01 * L) * (0.01 * L);
const C2: f64 = (0.03 * L) * (0.03 * L);

/// Summed-area table with a zero first row and column.
struct Integral {
    stride: usize,
    sums: Vec<u64>,
}

impl Integral {
    fn new(w: usize, h: usize, value: impl Fn(usize, usize) -> u64) -> Self {
        let stride = w + 1;
        let mut sums = vec![0u64; stride * (h + 1)];
        for y in 0..h {
            let mut row = 0u64;
            for x in 0..w {
                row += value(x, y);
                sums[(y + 1) * stride + x + 1] = sums[y * stride + x + 1] + row;
            }
        }
        Integral { stride, sums }
    }

    fn window(&self, x: usize, y: usize, size: usize) -> u64 {
        let s = self.stride;
        let (x1, y1) = (x + size, y + size);
        self.sums[y1 * s + x1] + self.sums[y * s + x] - self.sums[y * s + x1] - self.sums[y1 * s + x]
    }
}

/// Mean structural similarity over all 8×8 windows at stride 1, using
/// population statistics and the standard stabilizing constants for L = 255.
pub fn ssim(a: &GrayImage, b: &GrayImage) -> Result<f64> {
    let (w, h) = (a.width(), a.height());
    if (w, h) != (b.width(), b.height()) {
        return Err(Error::Image(format!(
            "size mismatch: {w}x{h} vs {}x{}",
            b.width(),
            b.height()
        )));
    }
    if w < SSIM_WINDOW || h < SSIM_WINDOW {
        return Err(Error::Image(format!(
            "{w}x{h} image is smaller than the {SSIM_WINDOW}x{SSIM_WINDOW} window"
        )));
    }
    let pa = |x: usize, y: usize| a.get(x, y) as u64;
    let pb = |x: usize, y: usize| b.get(x, y) as u64;
    let sa = Integral::new(w, h, pa);
    let sb = Integral::new(w, h, pb);
    let saa = Integral::new(w, h, |x, y| pa(x, y) * pa(x, y));
    let sbb = Integral::new(w, h, |x, y| pb(x, y) * pb(x, y));
    let sab = Integral::new(w, h, |x, y| pa(x, y) * pb(x, y));
    let n = (SSIM_WINDOW * SSIM_WINDOW) as f64;
    let mut total = 0.0;
    let mut count = 0usize;
    for y in 0..=(h - SSIM_WINDOW) {
        for x in 0..=(w - SSIM_WINDOW) {
            let q = |t: &Integral| t.window(x, y, SSIM_WINDOW) as f64;
            let (ma, mb) = (q(&sa) / n, q(&sb) / n);
            let va = q(&saa) / n - ma * ma;
            let vb = q(&sbb) / n - mb * mb;
            let cov = q(&sab) / n - ma * mb;
            let num = (2.0 * ma * mb + C1) * (2.0 * cov + C2);
            let den = (ma * ma + mb * mb + C1) * (va + vb + C2);
            total += num / den;
            count += 1;
        }
    }
    Ok(total / count as f64)
}
