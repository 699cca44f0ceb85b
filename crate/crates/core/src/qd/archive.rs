use serde::{Deserialize, Serialize};

use super::kmeans::nearest;
use crate::drawgen::Genome;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Elite {
    pub genome: Genome,
    pub fitness: f64,
    pub map_pos: [f64; 2],
    pub generation: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Niche {
    pub centroid: [f64; 2],
    pub elite: Option<Elite>,
}

/// A phenotype competing for a niche.
#[derive(Debug, Clone, PartialEq)]
pub struct Candidate {
    pub genome: Genome,
    pub fitness: f64,
    pub map_pos: [f64; 2],
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ChallengeOutcome {
    pub niche: usize,
    pub accepted: bool,
}

/// When centroids move toward their elite.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CentroidUpdate {
    /// Immediately on every accepted challenge.
    PerAcceptance,
    /// Once after all challenges of a generation, for every populated niche.
    PerGeneration,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EliteArchive {
    pub generation: u32,
    pub niches: Vec<Niche>,
}

fn step_toward(c: [f64; 2], target: [f64; 2], alpha: f64) -> [f64; 2] {
    [
        ((1.0 - alpha) * c[0] + alpha * target[0]).clamp(0.0, 1.0),
        ((1.0 - alpha) * c[1] + alpha * target[1]).clamp(0.0, 1.0),
    ]
}

impl EliteArchive {
    pub fn new(centroids: &[[f64; 2]]) -> Result<Self> {
        if centroids.len() < 2 {
            return Err(Error::validation("archive needs at least two niches"));
        }
        Ok(Self {
            generation: 0,
            niches: centroids
                .iter()
                .map(|&c| Niche {
                    centroid: [c[0].clamp(0.0, 1.0), c[1].clamp(0.0, 1.0)],
                    elite: None,
                })
                .collect(),
        })
    }

    pub fn k(&self) -> usize {
        self.niches.len()
    }

    pub fn centroids(&self) -> Vec<[f64; 2]> {
        self.niches.iter().map(|n| n.centroid).collect()
    }

    pub fn populated(&self) -> usize {
        self.niches.iter().filter(|n| n.elite.is_some()).count()
    }

    /// Populated niches over total niches.
    pub fn diversity(&self) -> f64 {
        self.populated() as f64 / self.k() as f64
    }

    /// Mean fitness of the elites; 0 for an empty archive.
    pub fn mean_elite_fitness(&self) -> f64 {
        let (sum, n) = self
            .elites()
            .fold((0.0, 0usize), |(s, n), e| (s + e.fitness, n + 1));
        if n == 0 { 0.0 } else { sum / n as f64 }
    }

    pub fn elites(&self) -> impl Iterator<Item = &Elite> {
        self.niches.iter().filter_map(|n| n.elite.as_ref())
    }

    pub fn niche_fitness(&self) -> Vec<Option<f64>> {
        self.niches
            .iter()
            .map(|n| n.elite.as_ref().map(|e| e.fitness))
            .collect()
    }

    /// Niche whose centroid is closest to `map_pos`; ties go to the lowest index.
    pub fn assign(&self, map_pos: [f64; 2]) -> usize {
        let centroids: Vec<[f64; 2]> = self.centroids();
        nearest(&map_pos, &centroids)
    }

    /// Offer `candidate` to its nearest niche. An empty niche always accepts;
    /// an occupied one only for strictly higher fitness. With `alpha = Some`,
    /// an accepted candidate pulls the centroid toward its map position.
    pub fn challenge(&mut self, candidate: Candidate, alpha: Option<f64>) -> ChallengeOutcome {
        let niche = self.assign(candidate.map_pos);
        let slot = &mut self.niches[niche];
        let accepted = match &slot.elite {
            None => true,
            Some(inc) => candidate.fitness > inc.fitness,
        };
        if accepted {
            if let Some(a) = alpha {
                slot.centroid = step_toward(slot.centroid, candidate.map_pos, a);
            }
            slot.elite = Some(Elite {
                genome: candidate.genome,
                fitness: candidate.fitness,
                map_pos: candidate.map_pos,
                generation: self.generation,
            });
        }
        ChallengeOutcome { niche, accepted }
    }

    /// Move every populated centroid toward its elite.
    pub fn pull_centroids(&mut self, alpha: f64) {
        for n in &mut self.niches {
            if let Some(e) = &n.elite {
                n.centroid = step_toward(n.centroid, e.map_pos, alpha);
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cand(fitness: f64, pos: [f64; 2]) -> Candidate {
        Candidate {
            genome: Genome::uniform(0.5).unwrap(),
            fitness,
            map_pos: pos,
        }
    }

    fn grid() -> EliteArchive {
        EliteArchive::new(&[[0.5, 0.5], [0.0, 0.0], [1.0, 1.0]]).unwrap()
    }

    #[test]
    fn empty_niche_accepts() {
        let mut a = grid();
        let out = a.challenge(cand(0.1, [0.45, 0.5]), None);
        assert_eq!(out, ChallengeOutcome { niche: 0, accepted: true });
        assert_eq!(a.populated(), 1);
    }

    #[test]
    fn ties_keep_incumbent() {
        let mut a = grid();
        a.challenge(cand(0.30, [0.5, 0.5]), None);
        let mut c = cand(0.30, [0.52, 0.5]);
        c.genome = Genome::uniform(0.9).unwrap();
        assert!(!a.challenge(c, None).accepted);
        assert_eq!(a.niches[0].elite.as_ref().unwrap().map_pos, [0.5, 0.5]);
        assert!(a.challenge(cand(0.31, [0.52, 0.5]), None).accepted);
    }

    #[test]
    fn centroid_moves_a_quarter_of_the_way() {
        let mut a = EliteArchive::new(&[[0.5, 0.5], [0.0, 0.0]]).unwrap();
        a.challenge(cand(0.4, [0.9, 0.5]), Some(0.25));
        let c = a.niches[0].centroid;
        assert!((c[0] - 0.6).abs() < 1e-15 && c[1] == 0.5, "{c:?}");
    }

    #[test]
    fn rejected_candidate_leaves_centroid() {
        let mut a = grid();
        a.challenge(cand(0.5, [0.5, 0.5]), Some(0.25));
        a.challenge(cand(0.2, [0.6, 0.6]), Some(0.25));
        assert_eq!(a.niches[0].centroid, [0.5, 0.5]);
    }

    #[test]
    fn assign_tie_goes_low() {
        let a = EliteArchive::new(&[[0.0, 0.0], [0.2, 0.0], [0.9, 0.9], [0.4, 0.0]]).unwrap();
        assert_eq!(a.assign([0.3, 0.0]), 1);
        assert_eq!(a.assign([0.9, 0.9]), 2);
    }

    #[test]
    fn pull_only_moves_populated() {
        let mut a = grid();
        a.challenge(cand(0.5, [0.6, 0.5]), None);
        a.pull_centroids(0.5);
        assert!((a.niches[0].centroid[0] - 0.55).abs() < 1e-15);
        assert_eq!(a.niches[1].centroid, [0.0, 0.0]);
    }
}
