//! The fixed corpus embedding and out-of-sample placement into it.

use super::container::{Tensor, TensorFile};
use super::pca::{Pca, fit_pca_components, orthonormality_error, project};
use super::tsne::{TsneParams, TsneResult, fit_tsne};
use crate::error::{Error, Result};

/// Default neighbour count for [`CorpusEmbedding::embed_new`].
pub const DEFAULT_NEIGHBOURS: usize = 5;

const NAMES: [&str; 6] = [
    "corpus.pca_mean",
    "corpus.pca_basis",
    "corpus.pca",
    "corpus.map",
    "corpus.norm_min",
    "corpus.norm_max",
];

/// Min-max normalise each of the two columns onto `[0, 1]`.
pub fn normalize_map(points: &[[f64; 2]]) -> Result<(Vec<[f64; 2]>, [f64; 2], [f64; 2])> {
    if points.is_empty() {
        return Err(Error::validation("cannot normalise an empty point set"));
    }
    let mut lo = [f64::INFINITY; 2];
    let mut hi = [f64::NEG_INFINITY; 2];
    for p in points {
        for d in 0..2 {
            lo[d] = lo[d].min(p[d]);
            hi[d] = hi[d].max(p[d]);
        }
    }
    for d in 0..2 {
        if !(hi[d] > lo[d]) {
            return Err(Error::validation(format!(
                "map dimension {d} has zero range ({})",
                lo[d]
            )));
        }
    }
    let out = points.iter().map(|p| unit_box(*p, lo, hi)).collect();
    Ok((out, lo, hi))
}

fn unit_box(p: [f64; 2], lo: [f64; 2], hi: [f64; 2]) -> [f64; 2] {
    [
        ((p[0] - lo[0]) / (hi[0] - lo[0])).clamp(0.0, 1.0),
        ((p[1] - lo[1]) / (hi[1] - lo[1])).clamp(0.0, 1.0),
    ]
}

fn quantize(v: &[f64]) -> Vec<f32> {
    v.iter().map(|&x| x as f32).collect()
}

/// PCA projection plus t-SNE map of a corpus.
///
/// Every value is held at `f32` precision so that a persisted and reloaded
/// embedding behaves identically to the freshly fitted one.
#[derive(Debug, Clone, PartialEq)]
pub struct CorpusEmbedding {
    latent_dim: usize,
    components: usize,
    pca_mean: Vec<f32>,
    pca_basis: Vec<f32>,
    corpus_pca: Vec<f32>,
    corpus_map: Vec<f32>,
    norm_min: [f32; 2],
    norm_max: [f32; 2],
}

/// Fitted corpus embedding plus diagnostics from the fit.
#[derive(Debug, Clone)]
pub struct CorpusFit {
    pub embedding: CorpusEmbedding,
    pub pca: Pca,
    pub tsne: TsneResult,
}

impl CorpusEmbedding {
    /// Fit PCA on `latents`, run t-SNE on the f32-rounded projections and
    /// normalise the layout.
    pub fn fit(
        latents: &[Vec<f32>],
        components: usize,
        tsne: &TsneParams,
        seed: u64,
    ) -> Result<CorpusFit> {
        let rows: Vec<Vec<f64>> = latents
            .iter()
            .map(|l| l.iter().map(|&v| f64::from(v)).collect())
            .collect();
        let pca = fit_pca_components(&rows, components)?;
        let pca_mean = quantize(&pca.mean);
        let pca_basis = quantize(&pca.basis);
        let dim = pca.dim;

        let corpus_pca: Vec<f32> = latents
            .iter()
            .flat_map(|l| quantize(&project(&pca_mean, &pca_basis, dim, l)))
            .collect();
        let tsne_in: Vec<Vec<f64>> = corpus_pca
            .chunks_exact(components)
            .map(|r| r.iter().map(|&v| f64::from(v)).collect())
            .collect();
        let tsne_out = fit_tsne(&tsne_in, tsne, seed)?;
        let corpus_map: Vec<f32> = tsne_out
            .layout
            .iter()
            .flat_map(|p| [p[0] as f32, p[1] as f32])
            .collect();
        let embedding = Self::from_parts(dim, components, pca_mean, pca_basis, corpus_pca, corpus_map)?;
        Ok(CorpusFit {
            embedding,
            pca,
            tsne: tsne_out,
        })
    }

    /// Assemble from stored arrays; norms are recomputed from `corpus_map`.
    pub fn from_parts(
        latent_dim: usize,
        components: usize,
        pca_mean: Vec<f32>,
        pca_basis: Vec<f32>,
        corpus_pca: Vec<f32>,
        corpus_map: Vec<f32>,
    ) -> Result<Self> {
        if pca_mean.len() != latent_dim
            || pca_basis.len() != components * latent_dim
            || components == 0
            || !corpus_pca.len().is_multiple_of(components)
            || !corpus_map.len().is_multiple_of(2)
            || corpus_pca.len() / components != corpus_map.len() / 2
        {
            return Err(Error::validation("corpus embedding arrays have inconsistent shapes"));
        }
        if corpus_map.is_empty() {
            return Err(Error::validation("corpus embedding is empty"));
        }
        let pts: Vec<[f64; 2]> = corpus_map
            .chunks_exact(2)
            .map(|c| [f64::from(c[0]), f64::from(c[1])])
            .collect();
        let (_, lo, hi) = normalize_map(&pts)?;
        Ok(Self {
            latent_dim,
            components,
            pca_mean,
            pca_basis,
            corpus_pca,
            corpus_map,
            norm_min: [lo[0] as f32, lo[1] as f32],
            norm_max: [hi[0] as f32, hi[1] as f32],
        })
    }

    pub fn len(&self) -> usize {
        self.corpus_map.len() / 2
    }

    pub fn is_empty(&self) -> bool {
        self.corpus_map.is_empty()
    }

    pub fn latent_dim(&self) -> usize {
        self.latent_dim
    }

    pub fn components(&self) -> usize {
        self.components
    }

    pub fn norm_bounds(&self) -> ([f32; 2], [f32; 2]) {
        (self.norm_min, self.norm_max)
    }

    pub fn basis(&self) -> &[f32] {
        &self.pca_basis
    }

    pub fn basis_orthonormality_error(&self) -> f64 {
        orthonormality_error(&self.pca_basis, self.latent_dim)
    }

    /// Raw (pre-normalisation) t-SNE coordinates of corpus point `i`.
    pub fn raw_map(&self, i: usize) -> [f64; 2] {
        [f64::from(self.corpus_map[2 * i]), f64::from(self.corpus_map[2 * i + 1])]
    }

    /// Normalised map position of corpus point `i`.
    pub fn map_pos(&self, i: usize) -> [f64; 2] {
        let lo = [f64::from(self.norm_min[0]), f64::from(self.norm_min[1])];
        let hi = [f64::from(self.norm_max[0]), f64::from(self.norm_max[1])];
        unit_box(self.raw_map(i), lo, hi)
    }

    pub fn map_positions(&self) -> Vec<[f64; 2]> {
        (0..self.len()).map(|i| self.map_pos(i)).collect()
    }

    pub fn corpus_pca(&self, i: usize) -> &[f32] {
        &self.corpus_pca[i * self.components..(i + 1) * self.components]
    }

    /// Project a latent into PCA space, rounded to `f32` like the stored corpus.
    pub fn project(&self, latent: &[f32]) -> Result<Vec<f32>> {
        if latent.len() != self.latent_dim {
            return Err(Error::validation(format!(
                "latent has {} values, corpus expects {}",
                latent.len(),
                self.latent_dim
            )));
        }
        Ok(quantize(&project(&self.pca_mean, &self.pca_basis, self.latent_dim, latent)))
    }

    /// Place a new latent on the map by inverse-distance weighting
    /// (`1 / (d + 1e-9)`) of its `m` nearest corpus points in PCA space.
    /// An exact match returns that point's position.
    pub fn embed_new(&self, latent: &[f32], m: usize) -> Result<[f64; 2]> {
        let q = self.project(latent)?;
        self.embed_projected(&q, m)
    }

    pub fn embed_projected(&self, q: &[f32], m: usize) -> Result<[f64; 2]> {
        if self.is_empty() {
            return Err(Error::validation("corpus embedding is empty"));
        }
        if m == 0 {
            return Err(Error::validation("neighbour count must be at least 1"));
        }
        let mut dists: Vec<(f64, usize)> = (0..self.len())
            .map(|i| {
                let d: f64 = self
                    .corpus_pca(i)
                    .iter()
                    .zip(q)
                    .map(|(&a, &b)| {
                        let t = f64::from(a) - f64::from(b);
                        t * t
                    })
                    .sum();
                (d.sqrt(), i)
            })
            .collect();
        let m = m.min(dists.len());
        dists.select_nth_unstable_by(m - 1, |a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
        let nearest = &mut dists[..m];
        nearest.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));

        if nearest[0].0 == 0.0 {
            return Ok(self.map_pos(nearest[0].1));
        }
        let mut acc = [0.0; 2];
        let mut total = 0.0;
        for &(d, i) in nearest.iter() {
            let w = 1.0 / (d + 1e-9);
            let p = self.map_pos(i);
            acc[0] += w * p[0];
            acc[1] += w * p[1];
            total += w;
        }
        Ok([
            (acc[0] / total).clamp(0.0, 1.0),
            (acc[1] / total).clamp(0.0, 1.0),
        ])
    }

    pub fn to_tensors(&self) -> TensorFile {
        let n = self.len();
        let mut f = TensorFile::default();
        let parts: [(Vec<usize>, Vec<f32>); 6] = [
            (vec![self.latent_dim], self.pca_mean.clone()),
            (vec![self.components, self.latent_dim], self.pca_basis.clone()),
            (vec![n, self.components], self.corpus_pca.clone()),
            (vec![n, 2], self.corpus_map.clone()),
            (vec![2], self.norm_min.to_vec()),
            (vec![2], self.norm_max.to_vec()),
        ];
        for (name, (dims, data)) in NAMES.iter().zip(parts) {
            f.push(Tensor::new(*name, dims, data).expect("shapes are consistent"));
        }
        f
    }

    pub fn from_tensors(file: &TensorFile) -> Result<Self> {
        let mean = file
            .get(NAMES[0])
            .ok_or_else(|| Error::Format(format!("missing tensor `{}`", NAMES[0])))?;
        let latent_dim = *mean.dims.first().unwrap_or(&0);
        let comps = file
            .get(NAMES[1])
            .ok_or_else(|| Error::Format(format!("missing tensor `{}`", NAMES[1])))?;
        let components = *comps.dims.first().unwrap_or(&0);
        let n = file
            .get(NAMES[3])
            .ok_or_else(|| Error::Format(format!("missing tensor `{}`", NAMES[3])))?
            .dims
            .first()
            .copied()
            .unwrap_or(0);
        let get = |i: usize, dims: &[usize]| file.expect(NAMES[i], dims).map(|t| t.data.clone());
        let emb = Self::from_parts(
            latent_dim,
            components,
            get(0, &[latent_dim])?,
            get(1, &[components, latent_dim])?,
            get(2, &[n, components])?,
            get(3, &[n, 2])?,
        )?;
        let (lo, hi) = (get(4, &[2])?, get(5, &[2])?);
        if lo != emb.norm_min || hi != emb.norm_max {
            return Err(Error::Format(
                "stored map normalisation bounds disagree with the stored map".into(),
            ));
        }
        Ok(emb)
    }
}
