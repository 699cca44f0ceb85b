//! Counter-based seed derivation.
//!
//! Every random stream in a run is keyed by `(master, stream, generation, index)`
//! and mixed through the SplitMix64 finalizer, so the value for one individual
//! never depends on how many draws another individual made or on evaluation order.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Random stream the engine draws from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u64)]
pub enum Stream {
    /// Initial random genomes of generation 1.
    InitialGenomes = 0x01,
    /// Niche sampling, mutation and random injection during breeding.
    Breeding = 0x02,
    /// Corpus genome sampling.
    Corpus = 0x03,
    /// k-means++ seeding.
    KMeans = 0x04,
    /// t-SNE initial layout.
    Tsne = 0x05,
    /// Stub encoder weights.
    StubWeights = 0x06,
}

/// SplitMix64 output function.
pub fn mix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// `mix64(mix64(mix64(master ^ stream) ^ generation) ^ index)`.
pub fn derive_seed(master: u64, stream: Stream, generation: u64, index: u64) -> u64 {
    mix64(mix64(mix64(master ^ stream as u64) ^ generation) ^ index)
}

pub fn stream_rng(master: u64, stream: Stream, generation: u64, index: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(derive_seed(master, stream, generation, index))
}
