use rand::Rng;

use super::archive::EliteArchive;
use crate::drawgen::{GENE_COUNT, Genome};

/// Per allele: with probability `rate`, add a uniform delta from `[-factor, factor]`
/// and clamp to `[0, 1]`. One decision draw per allele, plus one delta draw
/// for each mutated allele.
pub fn mutate<R: Rng + ?Sized>(genome: &Genome, rate: f64, factor: f64, rng: &mut R) -> Genome {
    let mut genes = *genome.genes();
    for g in &mut genes {
        if rng.random::<f64>() < rate {
            *g = (*g + rng.random_range(-factor..=factor)).clamp(0.0, 1.0);
        }
    }
    Genome::from_clamped(genes)
}

/// Number of alleles that differ between two genomes.
pub fn mutated_alleles(a: &Genome, b: &Genome) -> usize {
    (0..GENE_COUNT)
        .filter(|&i| a.genes()[i].to_bits() != b.genes()[i].to_bits())
        .count()
}

/// Where an offspring came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Origin {
    Mutant { niche: usize },
    Random { niche: usize },
}

/// Sample `lambda` niches uniformly with replacement; a populated niche
/// yields a mutant of its elite, an empty one a fresh random genome.
pub fn breed<R: Rng + ?Sized>(
    archive: &EliteArchive,
    lambda: usize,
    rate: f64,
    factor: f64,
    rng: &mut R,
) -> Vec<(Genome, Origin)> {
    (0..lambda)
        .map(|_| {
            let niche = rng.random_range(0..archive.k());
            match &archive.niches[niche].elite {
                Some(e) => (mutate(&e.genome, rate, factor, rng), Origin::Mutant { niche }),
                None => (Genome::random(rng), Origin::Random { niche }),
            }
        })
        .collect()
}
