//! Single-channel 8-bit images and their PNG representation.

use std::path::Path;

use image::{ExtendedColorType, ImageEncoder, codecs::png::PngEncoder};

use crate::error::{Error, IoContext, Result};

/// Row-major grayscale image; 0 is black ink, 255 is blank canvas.
#[derive(Clone, PartialEq, Eq)]
pub struct Raster {
    width: usize,
    height: usize,
    pixels: Vec<u8>,
}

impl std::fmt::Debug for Raster {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Raster")
            .field("width", &self.width)
            .field("height", &self.height)
            .finish_non_exhaustive()
    }
}

impl Raster {
    pub fn new(width: usize, height: usize, pixels: Vec<u8>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::validation(format!(
                "raster dimensions must be positive, got {width}x{height}"
            )));
        }
        if pixels.len() != width * height {
            return Err(Error::validation(format!(
                "raster {width}x{height} needs {} pixels, got {}",
                width * height,
                pixels.len()
            )));
        }
        Ok(Self {
            width,
            height,
            pixels,
        })
    }

    pub fn filled(width: usize, height: usize, value: u8) -> Self {
        assert!(width > 0 && height > 0, "raster dimensions must be positive");
        Self {
            width,
            height,
            pixels: vec![value; width * height],
        }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    /// Pixel count `width * height`.
    pub fn len(&self) -> usize {
        self.pixels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pixels.is_empty()
    }

    pub fn pixels(&self) -> &[u8] {
        &self.pixels
    }

    pub fn into_pixels(self) -> Vec<u8> {
        self.pixels
    }

    pub fn get(&self, x: usize, y: usize) -> u8 {
        self.pixels[y * self.width + x]
    }

    /// Area-averaging resample. Each output pixel is the exact
    /// coverage-weighted mean of the input pixels under its footprint.
    pub fn resample_area(&self, width: usize, height: usize) -> Result<Raster> {
        if width == 0 || height == 0 {
            return Err(Error::validation("resample target must be non-empty"));
        }
        if width == self.width && height == self.height {
            return Ok(self.clone());
        }
        let cols = footprints(self.width, width);
        let rows = footprints(self.height, height);
        let mut out = Vec::with_capacity(width * height);
        for row in &rows {
            for col in &cols {
                let mut acc = 0.0f64;
                let mut weight = 0.0f64;
                for &(sy, wy) in row {
                    let line = &self.pixels[sy * self.width..(sy + 1) * self.width];
                    for &(sx, wx) in col {
                        let w = wx * wy;
                        acc += w * f64::from(line[sx]);
                        weight += w;
                    }
                }
                out.push((acc / weight).round().clamp(0.0, 255.0) as u8);
            }
        }
        Raster::new(width, height, out)
    }

    /// Intensities scaled to `[0, 1]`.
    pub fn to_unit_f32(&self) -> Vec<f32> {
        self.pixels.iter().map(|&p| f32::from(p) / 255.0).collect()
    }

    /// Encode as an 8-bit grayscale PNG.
    pub fn to_png_bytes(&self) -> Vec<u8> {
        let mut buf = Vec::new();
        PngEncoder::new(&mut buf)
            .write_image(
                &self.pixels,
                self.width as u32,
                self.height as u32,
                ExtendedColorType::L8,
            )
            .expect("in-memory PNG encoding cannot fail for a valid raster");
        buf
    }

    pub fn write_png(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        std::fs::write(path, self.to_png_bytes()).at(path)
    }

    /// Read any PNG, converting colour images to luma.
    pub fn read_png(path: impl AsRef<Path>) -> Result<Raster> {
        let path = path.as_ref();
        let bytes = std::fs::read(path).at(path)?;
        let img = image::load_from_memory_with_format(&bytes, image::ImageFormat::Png).map_err(
            |e| Error::Image {
                path: path.to_path_buf(),
                message: e.to_string(),
            },
        )?;
        let luma = img.to_luma8();
        let (w, h) = luma.dimensions();
        Raster::new(w as usize, h as usize, luma.into_raw())
    }
}

/// For each destination cell, the source indices it overlaps and the overlap length.
fn footprints(src: usize, dst: usize) -> Vec<Vec<(usize, f64)>> {
    let scale = src as f64 / dst as f64;
    (0..dst)
        .map(|d| {
            let lo = d as f64 * scale;
            let hi = (d + 1) as f64 * scale;
            let first = lo.floor() as usize;
            let last = (hi.ceil() as usize).min(src);
            (first..last)
                .filter_map(|s| {
                    let overlap = hi.min((s + 1) as f64) - lo.max(s as f64);
                    (overlap > 1e-12).then_some((s, overlap))
                })
                .collect()
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_mismatched_buffer() {
        assert!(Raster::new(4, 4, vec![0; 15]).is_err());
        assert!(Raster::new(0, 4, vec![]).is_err());
    }

    #[test]
    fn integer_downsample_averages_blocks() {
        let px = vec![0, 255, 0, 255, 0, 255, 0, 255, 10, 10, 20, 20, 10, 10, 20, 20];
        let r = Raster::new(4, 4, px).unwrap();
        let d = r.resample_area(2, 2).unwrap();
        // 127.5 rounds half away from zero.
        assert_eq!(d.pixels(), &[128, 128, 10, 20]);
    }

    #[test]
    fn fractional_downsample_preserves_uniform() {
        let r = Raster::filled(10, 7, 77);
        let d = r.resample_area(3, 4).unwrap();
        assert!(d.pixels().iter().all(|&p| p == 77));
    }

    #[test]
    fn png_round_trip() {
        let px: Vec<u8> = (0..64u32 * 48).map(|i| (i * 7 % 256) as u8).collect();
        let r = Raster::new(64, 48, px).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("a.png");
        r.write_png(&path).unwrap();
        assert_eq!(Raster::read_png(&path).unwrap(), r);
    }
}
