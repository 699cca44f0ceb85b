use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use rayon::prelude::*;

use crate::drawgen::{GENE_COUNT, Genome, render};
use crate::embedding::{CorpusEmbedding, CorpusFit, EncoderWeights, INPUT_SIZE, PCA_COMPONENTS, TensorFile, TsneParams};
use crate::error::{Error, IoContext, Result};
use crate::raster::Raster;
use crate::seed::{Stream, stream_rng};

pub const MANIFEST: &str = "manifest.csv";
pub const IMAGE_DIR: &str = "images";
pub const THUMB_DIR: &str = "thumbs";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CorpusSpec {
    pub count: usize,
    pub canvas: usize,
    /// Seed of the genome draws.
    pub seed: u64,
    /// Renderer seed; should match the `render_seed` of the runs using it.
    pub render_seed: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ManifestRow {
    pub file: String,
    pub render_seed: u64,
    pub genome: Genome,
}

/// Genome `i` of a corpus drawn with `seed`.
pub fn corpus_genome(seed: u64, i: usize) -> Genome {
    Genome::random(&mut stream_rng(seed, Stream::Corpus, 0, i as u64))
}

/// Render a random-genome corpus: full-size PNGs, 64x64 thumbnails and a
/// manifest of file -> render seed -> genes.
pub fn cmd_corpus(spec: &CorpusSpec, out_dir: &Path) -> Result<Vec<ManifestRow>> {
    if spec.count == 0 {
        return Err(Error::validation("corpus count must be at least 1"));
    }
    let images = out_dir.join(IMAGE_DIR);
    let thumbs = out_dir.join(THUMB_DIR);
    std::fs::create_dir_all(&images).at(&images)?;
    std::fs::create_dir_all(&thumbs).at(&thumbs)?;

    let rows: Vec<ManifestRow> = (0..spec.count)
        .into_par_iter()
        .map(|i| {
            let genome = corpus_genome(spec.seed, i);
            let img = render(&genome, spec.canvas, spec.render_seed)?;
            let file = format!("{i:05}.png");
            img.resample_area(INPUT_SIZE, INPUT_SIZE)?.write_png(thumbs.join(&file))?;
            img.write_png(images.join(&file))?;
            Ok(ManifestRow {
                file,
                render_seed: spec.render_seed,
                genome,
            })
        })
        .collect::<Result<_>>()?;

    let mut csv = String::from("file,render_seed");
    for g in 0..GENE_COUNT {
        let _ = write!(csv, ",g{g}");
    }
    csv.push('\n');
    for r in &rows {
        let _ = write!(csv, "{},{}", r.file, r.render_seed);
        for v in r.genome.genes() {
            let _ = write!(csv, ",{v:?}");
        }
        csv.push('\n');
    }
    let path = out_dir.join(MANIFEST);
    std::fs::write(&path, csv).at(&path)?;
    Ok(rows)
}

pub fn read_manifest(corpus_dir: &Path) -> Result<Vec<ManifestRow>> {
    let path = corpus_dir.join(MANIFEST);
    let text = std::fs::read_to_string(&path).at(&path)?;
    let bad = |n: usize, what: &str| Error::Format(format!("{}: line {}: {what}", path.display(), n + 1));
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, h)) if h.starts_with("file,render_seed") => {}
        _ => return Err(bad(0, "missing manifest header")),
    }
    let mut rows = Vec::new();
    for (n, line) in lines {
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 2 + GENE_COUNT {
            return Err(bad(n, &format!("expected {} fields, got {}", 2 + GENE_COUNT, fields.len())));
        }
        let render_seed = fields[1].parse().map_err(|_| bad(n, "render_seed is not an integer"))?;
        let genes: Vec<f64> = fields[2..]
            .iter()
            .map(|f| f.parse::<f64>())
            .collect::<std::result::Result<_, _>>()
            .map_err(|_| bad(n, "gene is not a number"))?;
        let genome = Genome::from_slice(&genes).map_err(|e| bad(n, &e.to_string()))?;
        rows.push(ManifestRow {
            file: fields[0].to_string(),
            render_seed,
            genome,
        });
    }
    if rows.is_empty() {
        return Err(Error::validation(format!("corpus at {} is empty", corpus_dir.display())));
    }
    Ok(rows)
}

/// Encoder input for one corpus entry: the thumbnail if present, otherwise
/// the full image downsampled.
fn corpus_thumb(corpus_dir: &Path, file: &str) -> Result<Raster> {
    let thumb = corpus_dir.join(THUMB_DIR).join(file);
    let img = if thumb.exists() {
        Raster::read_png(&thumb)?
    } else {
        Raster::read_png(corpus_dir.join(IMAGE_DIR).join(file))?
    };
    if img.width() == INPUT_SIZE && img.height() == INPUT_SIZE {
        Ok(img)
    } else {
        img.resample_area(INPUT_SIZE, INPUT_SIZE)
    }
}

pub fn load_weights(path: &Path) -> Result<EncoderWeights> {
    EncoderWeights::from_tensors(&TensorFile::read(path)?)
}

pub fn load_embedding(path: &Path) -> Result<CorpusEmbedding> {
    CorpusEmbedding::from_tensors(&TensorFile::read(path)?)
}

/// Encode a corpus, fit PCA and t-SNE, and write the embedding container.
pub fn cmd_embed(
    corpus_dir: &Path,
    weights: &EncoderWeights,
    tsne: &TsneParams,
    seed: u64,
    out: &Path,
) -> Result<CorpusFit> {
    let rows = read_manifest(corpus_dir)?;
    let latents: Vec<Vec<f32>> = rows
        .par_iter()
        .map(|r| weights.encode(&corpus_thumb(corpus_dir, &r.file)?))
        .collect::<Result<_>>()?;
    let fit = CorpusEmbedding::fit(&latents, PCA_COMPONENTS, tsne, seed)?;
    if let Some(parent) = out.parent().filter(|p| !p.as_os_str().is_empty()) {
        std::fs::create_dir_all(parent).at(parent)?;
    }
    fit.embedding.to_tensors().write(out)?;
    Ok(fit)
}

/// Structural-complexity fitness of each PNG, in input order.
pub fn cmd_metrics(paths: &[PathBuf], resolution: usize) -> Result<Vec<(PathBuf, f64)>> {
    paths
        .par_iter()
        .map(|p| {
            let img = Raster::read_png(p)?;
            Ok((p.clone(), crate::metrics::fitness_at(&img, resolution)?.value()))
        })
        .collect()
}

pub fn metrics_csv(rows: &[(PathBuf, f64)]) -> String {
    let mut s = String::from("path,fitness\n");
    for (p, f) in rows {
        let _ = writeln!(s, "{},{f:?}", p.display());
    }
    s
}
