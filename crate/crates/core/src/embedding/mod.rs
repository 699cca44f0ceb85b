//! Feature extraction: phenotype -> encoder latent -> PCA -> 2-D map position.

mod container;
mod corpus;
mod encoder;
mod parity;
mod pca;
mod tsne;

pub use container::{FORMAT_VERSION, MAGIC, Tensor, TensorFile};
pub use corpus::{CorpusEmbedding, CorpusFit, DEFAULT_NEIGHBOURS, normalize_map};
pub use encoder::{EncoderWeights, INPUT_SIZE, LATENT_DIM};
pub use parity::{
    PARITY_CSV, ParityEntry, ParityReport, check_parity, export_parity_pack, read_parity_csv,
    relative_error,
};
pub use pca::{PCA_COMPONENTS, Pca, fit_pca, fit_pca_components, orthonormality_error, project};
pub use tsne::{TsneParams, TsneResult, fit_tsne};

use crate::error::{Error, Result};
use crate::raster::Raster;

/// Staged embedding of one phenotype.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureVector {
    pub latent: Vec<f32>,
    pub pca: Vec<f32>,
    pub map_pos: [f64; 2],
}

/// Encoder plus fitted corpus: everything needed to place a phenotype.
#[derive(Debug, Clone)]
pub struct FeatureExtractor {
    weights: EncoderWeights,
    corpus: CorpusEmbedding,
    neighbours: usize,
}

impl FeatureExtractor {
    pub fn new(weights: EncoderWeights, corpus: CorpusEmbedding, neighbours: usize) -> Result<Self> {
        if corpus.latent_dim() != LATENT_DIM {
            return Err(Error::validation(format!(
                "corpus latent dimension {} does not match encoder output {LATENT_DIM}",
                corpus.latent_dim()
            )));
        }
        if neighbours == 0 {
            return Err(Error::validation("neighbour count must be at least 1"));
        }
        Ok(Self {
            weights,
            corpus,
            neighbours,
        })
    }

    pub fn corpus(&self) -> &CorpusEmbedding {
        &self.corpus
    }

    pub fn weights(&self) -> &EncoderWeights {
        &self.weights
    }

    /// Downsample to the encoder resolution and encode.
    pub fn latent(&self, img: &Raster) -> Result<Vec<f32>> {
        self.weights.encode(&img.resample_area(INPUT_SIZE, INPUT_SIZE)?)
    }

    pub fn features(&self, img: &Raster) -> Result<FeatureVector> {
        let latent = self.latent(img)?;
        let pca = self.corpus.project(&latent)?;
        let map_pos = self.corpus.embed_projected(&pca, self.neighbours)?;
        Ok(FeatureVector {
            latent,
            pca,
            map_pos,
        })
    }
}
