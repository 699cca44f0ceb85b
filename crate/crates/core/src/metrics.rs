//! Structural complexity: blur, quantise to three levels, then measure how
//! well the result compresses under raw DEFLATE.

use std::io::Write;

use flate2::{Compression, write::DeflateEncoder};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::raster::Raster;

/// Side length fitness is measured at.
pub const FITNESS_RESOLUTION: usize = 256;

/// Lower and upper boundaries of the middle intensity class.
pub const THRESHOLDS: (u8, u8) = (85, 170);

/// Compression ratio in `(0, 1]`; higher is more complex.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
pub struct Fitness(f64);

impl Fitness {
    pub fn new(value: f64) -> Result<Self> {
        if value > 0.0 && value <= 1.0 {
            Ok(Fitness(value))
        } else {
            Err(Error::validation(format!("fitness {value} is outside (0, 1]")))
        }
    }

    pub fn value(self) -> f64 {
        self.0
    }
}

/// Normalised 1-D Gaussian taps, radius `ceil(3 sigma)`.
pub fn gaussian_kernel(sigma: f64) -> Vec<f64> {
    let radius = (3.0 * sigma).ceil() as i64;
    let mut taps: Vec<f64> = (-radius..=radius)
        .map(|k| (-((k * k) as f64) / (2.0 * sigma * sigma)).exp())
        .collect();
    let sum: f64 = taps.iter().sum();
    taps.iter_mut().for_each(|t| *t /= sum);
    taps
}

/// Separable Gaussian blur with clamp-to-edge borders.
pub fn low_pass(img: &Raster, sigma: f64) -> Result<Raster> {
    if !(sigma > 0.0 && sigma.is_finite()) {
        return Err(Error::validation(format!(
            "blur sigma must be positive, got {sigma}"
        )));
    }
    let kernel = gaussian_kernel(sigma);
    let radius = (kernel.len() / 2) as isize;
    let (w, h) = (img.width(), img.height());
    let src = img.pixels();

    let mut horiz = vec![0.0f64; w * h];
    for y in 0..h {
        let row = &src[y * w..(y + 1) * w];
        for x in 0..w {
            let mut acc = 0.0;
            for (k, &wt) in kernel.iter().enumerate() {
                let sx = (x as isize + k as isize - radius).clamp(0, w as isize - 1) as usize;
                acc += wt * f64::from(row[sx]);
            }
            horiz[y * w + x] = acc;
        }
    }

    let mut out = vec![0u8; w * h];
    for y in 0..h {
        for x in 0..w {
            let mut acc = 0.0;
            for (k, &wt) in kernel.iter().enumerate() {
                let sy = (y as isize + k as isize - radius).clamp(0, h as isize - 1) as usize;
                acc += wt * horiz[sy * w + x];
            }
            out[y * w + x] = acc.round().clamp(0.0, 255.0) as u8;
        }
    }
    Raster::new(w, h, out)
}

/// Map a single intensity to 0, 128 or 255.
pub fn tri_level(v: u8) -> u8 {
    if v < THRESHOLDS.0 {
        0
    } else if v < THRESHOLDS.1 {
        128
    } else {
        255
    }
}

pub fn tri_threshold(img: &Raster) -> Raster {
    let px = img.pixels().iter().map(|&v| tri_level(v)).collect();
    Raster::new(img.width(), img.height(), px).expect("same dimensions")
}

/// Raw DEFLATE (no zlib/gzip wrapper) at level 9.
pub fn deflate_len(bytes: &[u8]) -> usize {
    let mut enc = DeflateEncoder::new(Vec::new(), Compression::best());
    enc.write_all(bytes).expect("writing to a Vec cannot fail");
    enc.finish().expect("writing to a Vec cannot fail").len()
}

/// Full pipeline at the raster's own resolution, `sigma = width / 128`.
pub fn structural_complexity(img: &Raster) -> Fitness {
    let sigma = img.width() as f64 / 128.0;
    let blurred = low_pass(img, sigma).expect("sigma is positive for non-empty rasters");
    let levels = tri_threshold(&blurred);
    let ratio = deflate_len(levels.pixels()) as f64 / levels.len() as f64;
    // Incompressible buffers come out a few bytes larger than the input.
    Fitness(ratio.min(1.0))
}

/// Resample to [`FITNESS_RESOLUTION`] (or `resolution`) and score.
pub fn fitness_at(img: &Raster, resolution: usize) -> Result<Fitness> {
    let scaled = img.resample_area(resolution, resolution)?;
    Ok(structural_complexity(&scaled))
}
