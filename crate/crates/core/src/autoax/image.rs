// SPDX-License-Identifier: Apache-2.0

//! 8-bit grayscale images and portable graymap (PGM) I/O.

use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GrayImage {
    width: usize,
    height: usize,
    pixels: Vec<u8>,
}

impl GrayImage {
    pub fn new(width: usize, height: usize, pixels: Vec<u8>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::Image("image has no pixels".into()));
        }
        if pixels.len() != width * height {
            return Err(Error::Image(format!(
                "{} pixels for a {width}x{height} image",
                pixels.len()
            )));
        }
        Ok(GrayImage { width, height, pixels })
    }

    pub fn filled(width: usize, height: usize, value: u8) -> Result<Self> {
        Self::new(width, height, vec![value; width * height])
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn pixels(&self) -> &[u8] {
        &self.pixels
    }

    pub fn get(&self, x: usize, y: usize) -> u8 {
        self.pixels[y * self.width + x]
    }

    /// Pixel at a possibly out-of-range position, clamped to the nearest edge.
    pub fn get_clamped(&self, x: isize, y: isize) -> u8 {
        let cx = x.clamp(0, self.width as isize - 1) as usize;
        let cy = y.clamp(0, self.height as isize - 1) as usize;
        self.get(cx, cy)
    }

    /// Binary (P5) graymap with maxval 255.
    pub fn to_pgm(&self) -> Vec<u8> {
        let mut out = format!("P5\n{} {}\n255\n", self.width, self.height).into_bytes();
        out.extend_from_slice(&self.pixels);
        out
    }

    /// ASCII (P2) graymap with maxval 255.
    pub fn to_pgm_ascii(&self) -> String {
        let mut out = format!("P2\n{} {}\n255\n", self.width, self.height);
        for row in self.pixels.chunks(self.width) {
            let line: Vec<String> = row.iter().map(|p| p.to_string()).collect();
            out.push_str(&line.join(" "));
            out.push('\n');
        }
        out
    }

    /// Parses P2 or P5 with maxval at most 255; `#` comments are allowed in the header.
    pub fn from_pgm(data: &[u8]) -> Result<Self> {
        let mut pos = 0;
        let mut token = || -> Result<String> {
            loop {
                while pos < data.len() && data[pos].is_ascii_whitespace() {
                    pos += 1;
                }
                if pos < data.len() && data[pos] == b'#' {
                    while pos < data.len() && data[pos] != b'\n' {
                        pos += 1;
                    }
                    continue;
                }
                break;
            }
            let start = pos;
            while pos < data.len() && !data[pos].is_ascii_whitespace() {
                pos += 1;
            }
            if start == pos {
                return Err(Error::Image("truncated graymap header".into()));
            }
            Ok(String::from_utf8_lossy(&data[start..pos]).into_owned())
        };
        let magic = token()?;
        let num = |s: String| {
            s.parse::<usize>()
                .map_err(|_| Error::Image(format!("bad header value `{s}`")))
        };
        let width = num(token()?)?;
        let height = num(token()?)?;
        let maxval = num(token()?)?;
        if maxval == 0 || maxval > 255 {
            return Err(Error::Image(format!("unsupported maxval {maxval}")));
        }
        let n = width * height;
        let pixels = match magic.as_str() {
            "P5" => {
                // Exactly one whitespace byte separates the header from the raster.
                let start = pos + 1;
                let raster = data
                    .get(start..start + n)
                    .ok_or_else(|| Error::Image("truncated raster".into()))?;
                raster.to_vec()
            }
            "P2" => {
                let mut px = Vec::with_capacity(n);
                for _ in 0..n {
                    let v = num(token()?)?;
                    if v > maxval {
                        return Err(Error::Image(format!("pixel {v} exceeds maxval {maxval}")));
                    }
                    px.push(v as u8);
                }
                px
            }
            other => return Err(Error::Image(format!("unsupported format `{other}`"))),
        };
        Self::new(width, height, pixels)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let data = std::fs::read(path).map_err(|e| Error::io(path, e))?;
        Self::from_pgm(&data)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_pgm()).map_err(|e| Error::io(path, e))
    }
}

/// Smoothed uniform noise stretched to the full 0..=255 range: a stand-in
/// for natural images with both flat regions and edges.
pub fn synthetic_image(width: usize, height: usize, seed: u64) -> Result<GrayImage> {
    if width == 0 || height == 0 {
        return Err(Error::Image("image has no pixels".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut field: Vec<f64> = (0..width * height).map(|_| rng.gen::<f64>()).collect();
    let radius = 2isize;
    for _ in 0..3 {
        let src = field.clone();
        for y in 0..height as isize {
            for x in 0..width as isize {
                let mut acc = 0.0;
                let mut cnt = 0.0;
                for dy in -radius..=radius {
                    for dx in -radius..=radius {
                        let cx = (x + dx).clamp(0, width as isize - 1) as usize;
                        let cy = (y + dy).clamp(0, height as isize - 1) as usize;
                        acc += src[cy * width + cx];
                        cnt += 1.0;
                    }
                }
                field[y as usize * width + x as usize] = acc / cnt;
            }
        }
    }
    let lo = field.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = field.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let span = if hi > lo { hi - lo } else { 1.0 };
    let pixels = field.iter().map(|v| ((v - lo) / span * 255.0).round() as u8).collect();
    GrayImage::new(width, height, pixels)
}
