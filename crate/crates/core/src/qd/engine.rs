//! The search loops: quality-diversity (niche archive) and the fitness-only
//! genetic algorithm used as a control.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::archive::{Candidate, CentroidUpdate, EliteArchive};
use super::config::RunConfig;
use super::variation::{breed, mutate};
use crate::drawgen::{Genome, render};
use crate::embedding::FeatureExtractor;
use crate::error::{Error, Result};
use crate::metrics::{Fitness, fitness_at};
use crate::raster::Raster;
use crate::seed::{Stream, stream_rng};
use rand::Rng;

/// Genome to phenotype.
pub trait Phenotyper: Sync {
    fn express(&self, genome: &Genome) -> Result<Raster>;
}

pub trait FitnessFn: Sync {
    fn fitness(&self, img: &Raster) -> Result<Fitness>;
}

/// Phenotype to a position in the unit square.
pub trait Embedder: Sync {
    fn place(&self, img: &Raster) -> Result<[f64; 2]>;
}

impl<F: Fn(&Genome) -> Result<Raster> + Sync> Phenotyper for F {
    fn express(&self, genome: &Genome) -> Result<Raster> {
        self(genome)
    }
}

impl<F: Fn(&Raster) -> Result<Fitness> + Sync> FitnessFn for F {
    fn fitness(&self, img: &Raster) -> Result<Fitness> {
        self(img)
    }
}

impl<F: Fn(&Raster) -> Result<[f64; 2]> + Sync> Embedder for F {
    fn place(&self, img: &Raster) -> Result<[f64; 2]> {
        self(img)
    }
}

/// The line-drawing renderer at a fixed canvas size and seed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LineDrawing {
    pub canvas: usize,
    pub seed: u64,
}

impl Phenotyper for LineDrawing {
    fn express(&self, genome: &Genome) -> Result<Raster> {
        render(genome, self.canvas, self.seed)
    }
}

/// Structural complexity measured at a fixed resolution.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct StructuralComplexity {
    pub resolution: usize,
}

impl FitnessFn for StructuralComplexity {
    fn fitness(&self, img: &Raster) -> Result<Fitness> {
        fitness_at(img, self.resolution)
    }
}

impl Embedder for FeatureExtractor {
    fn place(&self, img: &Raster) -> Result<[f64; 2]> {
        Ok(self.features(img)?.map_pos)
    }
}

/// Per-generation summary of a quality-diversity run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GenerationRecord {
    pub generation: u32,
    pub mean_elite_fitness: f64,
    pub diversity: f64,
    pub populated: usize,
    pub niche_fitness: Vec<Option<f64>>,
    pub accepted: usize,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct RunLog {
    pub records: Vec<GenerationRecord>,
}

impl RunLog {
    pub const CSV_HEADER: &'static str = "generation,mean_elite_fitness,diversity,populated_count";

    pub fn to_csv(&self) -> String {
        let mut s = format!("{}\n", Self::CSV_HEADER);
        for r in &self.records {
            s.push_str(&format!(
                "{},{:?},{:?},{}\n",
                r.generation, r.mean_elite_fitness, r.diversity, r.populated
            ));
        }
        s
    }
}

#[derive(Debug, Clone)]
pub struct QdOutcome {
    pub archive: EliteArchive,
    pub log: RunLog,
    /// Archive state after each generation, starting with generation 1.
    pub history: Vec<EliteArchive>,
}

struct Evaluated {
    genome: Genome,
    fitness: f64,
    map_pos: Option<[f64; 2]>,
}

fn evaluate(
    generation: usize,
    genomes: Vec<Genome>,
    phenotyper: &dyn Phenotyper,
    fitness: &dyn FitnessFn,
    embedder: Option<&dyn Embedder>,
) -> Result<Vec<Evaluated>> {
    evaluate_from(generation, 0, genomes, phenotyper, fitness, embedder)
}

/// `offset` is added to individual indices in error messages.
fn evaluate_from(
    generation: usize,
    offset: usize,
    genomes: Vec<Genome>,
    phenotyper: &dyn Phenotyper,
    fitness: &dyn FitnessFn,
    embedder: Option<&dyn Embedder>,
) -> Result<Vec<Evaluated>> {
    genomes
        .into_par_iter()
        .enumerate()
        .map(|(i, genome)| {
            let i = i + offset;
            let ctx = |e: Error| match e {
                Error::Validation(m) => Error::Validation(format!("generation {generation}, individual {i}: {m}")),
                other => other,
            };
            let img = phenotyper.express(&genome).map_err(ctx)?;
            let fit = fitness.fitness(&img).map_err(ctx)?.value();
            let map_pos = embedder.map(|e| e.place(&img)).transpose().map_err(ctx)?;
            Ok(Evaluated {
                genome,
                fitness: fit,
                map_pos,
            })
        })
        .collect()
}

/// Run the niche-archive search for `config.e` generations starting from
/// k-means `centroids` over the corpus map.
///
/// Generation 1 draws `lambda` uniform genomes; later generations breed from
/// the archive. Evaluations may run in parallel; challenges are applied in
/// individual order.
pub fn run_qd(
    config: &RunConfig,
    centroids: &[[f64; 2]],
    phenotyper: &dyn Phenotyper,
    fitness: &dyn FitnessFn,
    embedder: &dyn Embedder,
) -> Result<QdOutcome> {
    config.validate_search()?;
    if centroids.len() != config.k {
        return Err(Error::validation(format!(
            "expected k = {} centroids, got {}",
            config.k,
            centroids.len()
        )));
    }
    let mut archive = EliteArchive::new(centroids)?;
    let mut log = RunLog::default();
    let mut history = Vec::with_capacity(config.e);
    let per_acceptance = config.centroid_update == CentroidUpdate::PerAcceptance;

    for generation in 1..=config.e {
        let genomes: Vec<Genome> = if generation == 1 {
            let mut rng = stream_rng(config.master_seed, Stream::InitialGenomes, 1, 0);
            (0..config.lambda).map(|_| Genome::random(&mut rng)).collect()
        } else {
            let mut rng = stream_rng(config.master_seed, Stream::Breeding, generation as u64, 0);
            breed(&archive, config.lambda, config.r, config.f, &mut rng)
                .into_iter()
                .map(|(g, _)| g)
                .collect()
        };
        let evaluated = evaluate(generation, genomes, phenotyper, fitness, Some(embedder))?;

        archive.generation = generation as u32;
        let mut accepted = 0;
        for ev in evaluated {
            let candidate = Candidate {
                genome: ev.genome,
                fitness: ev.fitness,
                map_pos: ev.map_pos.expect("embedder supplied"),
            };
            let alpha = per_acceptance.then_some(config.alpha);
            if archive.challenge(candidate, alpha).accepted {
                accepted += 1;
            }
        }
        if !per_acceptance {
            archive.pull_centroids(config.alpha);
        }

        log.records.push(GenerationRecord {
            generation: generation as u32,
            mean_elite_fitness: archive.mean_elite_fitness(),
            diversity: archive.diversity(),
            populated: archive.populated(),
            niche_fitness: archive.niche_fitness(),
            accepted,
        });
        history.push(archive.clone());
    }
    Ok(QdOutcome {
        archive,
        log,
        history,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Individual {
    pub genome: Genome,
    pub fitness: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GaRecord {
    pub generation: u32,
    pub best_fitness: f64,
    pub mean_fitness: f64,
}

#[derive(Debug, Clone)]
pub struct GaOutcome {
    pub log: Vec<GaRecord>,
    /// Fittest individual of each generation.
    pub best_per_generation: Vec<Individual>,
    /// Fittest individual seen over the whole run (earliest on ties).
    pub champion: Individual,
}

impl GaOutcome {
    pub const CSV_HEADER: &'static str = "generation,best_fitness,mean_fitness";

    pub fn log_csv(&self) -> String {
        let mut s = format!("{}\n", Self::CSV_HEADER);
        for r in &self.log {
            s.push_str(&format!(
                "{},{:?},{:?}\n",
                r.generation, r.best_fitness, r.mean_fitness
            ));
        }
        s
    }
}

/// Parent pool size: the fittest quarter, rounded up.
pub fn parent_pool_size(lambda: usize) -> usize {
    lambda.div_ceil(4).max(1)
}

/// Fitness-only control: mutate uniform draws from the fittest quarter of
/// the previous generation. With elitism the previous best is carried over
/// unmutated as offspring 0.
pub fn run_ga(config: &RunConfig, phenotyper: &dyn Phenotyper, fitness: &dyn FitnessFn) -> Result<GaOutcome> {
    config.validate_search()?;
    let mut log = Vec::with_capacity(config.e);
    let mut best_per_generation = Vec::with_capacity(config.e);
    let mut champion: Option<Individual> = None;
    let mut population: Vec<Individual> = Vec::new();

    for generation in 1..=config.e {
        // With elitism the carried-over individual keeps its known fitness;
        // rendering is deterministic, so re-evaluating it would change nothing.
        let mut carried = None;
        let genomes: Vec<Genome> = if generation == 1 {
            let mut rng = stream_rng(config.master_seed, Stream::InitialGenomes, 1, 0);
            (0..config.lambda).map(|_| Genome::random(&mut rng)).collect()
        } else {
            let mut order: Vec<usize> = (0..population.len()).collect();
            order.sort_by(|&a, &b| {
                population[b]
                    .fitness
                    .total_cmp(&population[a].fitness)
                    .then(a.cmp(&b))
            });
            let pool: Vec<&Genome> = order
                .iter()
                .take(parent_pool_size(config.lambda))
                .map(|&i| &population[i].genome)
                .collect();
            let mut rng = stream_rng(config.master_seed, Stream::Breeding, generation as u64, 0);
            let mut next = Vec::with_capacity(config.lambda);
            if config.elitism {
                carried = Some(population[order[0]].clone());
            }
            let fresh = config.lambda - usize::from(carried.is_some());
            while next.len() < fresh {
                let parent = pool[rng.random_range(0..pool.len())];
                next.push(mutate(parent, config.r, config.f, &mut rng));
            }
            next
        };
        let offset = usize::from(carried.is_some());
        population = carried
            .into_iter()
            .map(Ok)
            .chain(
                evaluate_from(generation, offset, genomes, phenotyper, fitness, None)?
                    .into_iter()
                    .map(|e| {
                        Ok(Individual {
                            genome: e.genome,
                            fitness: e.fitness,
                        })
                    }),
            )
            .collect::<Result<_>>()?;

        let best = population
            .iter()
            .enumerate()
            .max_by(|(ia, a), (ib, b)| a.fitness.total_cmp(&b.fitness).then(ib.cmp(ia)))
            .map(|(_, b)| b.clone())
            .expect("lambda >= 1");
        let mean = population.iter().map(|i| i.fitness).sum::<f64>() / population.len() as f64;
        log.push(GaRecord {
            generation: generation as u32,
            best_fitness: best.fitness,
            mean_fitness: mean,
        });
        if champion.as_ref().is_none_or(|c| best.fitness > c.fitness) {
            champion = Some(best.clone());
        }
        best_per_generation.push(best);
    }
    Ok(GaOutcome {
        log,
        best_per_generation,
        champion: champion.expect("e >= 1"),
    })
}

impl RunConfig {
    /// Constraints the search loops need (artifact paths are not required).
    fn validate_search(&self) -> Result<()> {
        let p: Vec<String> = self
            .problems()
            .into_iter()
            .filter(|m| !m.contains("is required"))
            .collect();
        if p.is_empty() { Ok(()) } else { Err(Error::Config(p)) }
    }
}
