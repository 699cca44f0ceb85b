//! Niche-archive evolutionary search and its fitness-only control.

mod archive;
mod config;
mod engine;
mod kmeans;
mod variation;

pub use archive::{Candidate, CentroidUpdate, ChallengeOutcome, Elite, EliteArchive, Niche};
pub use config::{Mode, RunConfig};
pub use engine::{
    Embedder, FitnessFn, GaOutcome, GaRecord, GenerationRecord, Individual, LineDrawing,
    Phenotyper, QdOutcome, RunLog, StructuralComplexity, parent_pool_size, run_ga, run_qd,
};
pub use kmeans::{KMeans, MAX_LLOYD_ITERATIONS, kmeans, nearest, objective, sq_dist};
pub use variation::{Origin, breed, mutate, mutated_alleles};
