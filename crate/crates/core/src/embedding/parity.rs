//! Parity packs: reference `(image, latent)` pairs used to check that this
//! encoder reproduces a trainer's mean-head outputs.
//!
//! A pack is a directory of 64x64 PNGs plus `latents.csv`, whose header is
//! `image,z0,...,z511` and whose rows name a PNG in the same directory.

use std::fmt::Write as _;
use std::path::Path;

use super::encoder::{EncoderWeights, LATENT_DIM};
use crate::error::{Error, IoContext, Result};
use crate::raster::Raster;

pub const PARITY_CSV: &str = "latents.csv";

#[derive(Debug, Clone, PartialEq)]
pub struct ParityEntry {
    pub image: String,
    pub latent: Vec<f32>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ParityReport {
    pub rows: usize,
    /// Largest `|enc - ref|_2 / |ref|_2` over all rows.
    pub max_relative_error: f64,
    pub worst_image: Option<String>,
}

impl ParityReport {
    pub fn passes(&self, tolerance: f64) -> bool {
        self.max_relative_error < tolerance
    }
}

pub fn read_parity_csv(path: impl AsRef<Path>) -> Result<Vec<ParityEntry>> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).at(path)?;
    let mut lines = text.lines();
    let header = lines
        .next()
        .ok_or_else(|| Error::Format(format!("{} is empty", path.display())))?;
    let cols: Vec<&str> = header.split(',').collect();
    if cols.len() != LATENT_DIM + 1 || cols[0] != "image" {
        return Err(Error::Format(format!(
            "parity header must be `image,z0..z{}`",
            LATENT_DIM - 1
        )));
    }
    lines
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, line)| {
            let mut it = line.split(',');
            let image = it.next().unwrap_or_default().to_owned();
            let latent = it
                .map(|v| v.trim().parse::<f32>())
                .collect::<std::result::Result<Vec<_>, _>>()
                .map_err(|e| Error::Format(format!("parity row {}: {e}", i + 1)))?;
            if latent.len() != LATENT_DIM {
                return Err(Error::Format(format!(
                    "parity row {} has {} values, expected {LATENT_DIM}",
                    i + 1,
                    latent.len()
                )));
            }
            Ok(ParityEntry { image, latent })
        })
        .collect()
}

/// Encode every image of a pack and compare against its reference latent.
pub fn check_parity(dir: impl AsRef<Path>, weights: &EncoderWeights) -> Result<ParityReport> {
    let dir = dir.as_ref();
    let entries = read_parity_csv(dir.join(PARITY_CSV))?;
    let mut report = ParityReport {
        rows: entries.len(),
        max_relative_error: 0.0,
        worst_image: None,
    };
    for e in &entries {
        let img = Raster::read_png(dir.join(&e.image))?;
        let got = weights.encode(&img)?;
        let err = relative_error(&got, &e.latent);
        if report.worst_image.is_none() || err > report.max_relative_error {
            report.max_relative_error = err;
            report.worst_image = Some(e.image.clone());
        }
    }
    Ok(report)
}

pub fn relative_error(got: &[f32], reference: &[f32]) -> f64 {
    let diff: f64 = got
        .iter()
        .zip(reference)
        .map(|(&a, &b)| (f64::from(a) - f64::from(b)).powi(2))
        .sum::<f64>()
        .sqrt();
    let norm: f64 = reference
        .iter()
        .map(|&b| f64::from(b).powi(2))
        .sum::<f64>()
        .sqrt();
    if norm == 0.0 {
        diff
    } else {
        diff / norm
    }
}

/// Write a pack from this encoder, for self-checks and as a format reference.
pub fn export_parity_pack(
    dir: impl AsRef<Path>,
    images: &[Raster],
    weights: &EncoderWeights,
) -> Result<()> {
    let dir = dir.as_ref();
    std::fs::create_dir_all(dir).at(dir)?;
    let mut csv = String::from("image");
    for i in 0..LATENT_DIM {
        write!(csv, ",z{i}").expect("string write");
    }
    csv.push('\n');
    for (i, img) in images.iter().enumerate() {
        let name = format!("parity_{i:03}.png");
        img.write_png(dir.join(&name))?;
        csv.push_str(&name);
        for v in weights.encode(img)? {
            write!(csv, ",{v}").expect("string write");
        }
        csv.push('\n');
    }
    let path = dir.join(PARITY_CSV);
    std::fs::write(&path, csv).at(&path)
}
