use std::f64::consts::TAU;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Number of genes in a genome.
pub const GENE_COUNT: usize = 14;

/// A point in the normalised genotype space `[0, 1]^14`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "GenomeRepr", into = "GenomeRepr")]
pub struct Genome([f64; GENE_COUNT]);

#[derive(Serialize, Deserialize)]
struct GenomeRepr {
    genes: Vec<f64>,
}

impl TryFrom<GenomeRepr> for Genome {
    type Error = Error;
    fn try_from(r: GenomeRepr) -> Result<Self> {
        Genome::from_slice(&r.genes)
    }
}

impl From<Genome> for GenomeRepr {
    fn from(g: Genome) -> Self {
        GenomeRepr { genes: g.0.to_vec() }
    }
}

impl Genome {
    pub fn new(genes: [f64; GENE_COUNT]) -> Result<Self> {
        Self::from_slice(&genes)
    }

    pub fn from_slice(genes: &[f64]) -> Result<Self> {
        if genes.len() != GENE_COUNT {
            return Err(Error::validation(format!(
                "genome must have {GENE_COUNT} genes, got {}",
                genes.len()
            )));
        }
        if let Some((i, g)) = genes
            .iter()
            .enumerate()
            .find(|(_, g)| !(0.0..=1.0).contains(*g))
        {
            return Err(Error::validation(format!(
                "gene {i} = {g} is outside [0, 1]"
            )));
        }
        let mut out = [0.0; GENE_COUNT];
        out.copy_from_slice(genes);
        Ok(Genome(out))
    }

    pub fn uniform(value: f64) -> Result<Self> {
        Self::new([value; GENE_COUNT])
    }

    /// Uniformly random genome.
    pub fn random<R: Rng + ?Sized>(rng: &mut R) -> Self {
        let mut genes = [0.0; GENE_COUNT];
        for g in &mut genes {
            *g = rng.random::<f64>();
        }
        Genome(genes)
    }

    pub fn genes(&self) -> &[f64; GENE_COUNT] {
        &self.0
    }

    /// Unchecked construction for callers that have already clamped.
    pub(crate) fn from_clamped(genes: [f64; GENE_COUNT]) -> Self {
        debug_assert!(genes.iter().all(|g| (0.0..=1.0).contains(g)));
        Genome(genes)
    }

    /// Euclidean distance in genotype space.
    pub fn distance(&self, other: &Genome) -> f64 {
        self.0
            .iter()
            .zip(&other.0)
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt()
    }
}

/// Behaviour parameters of the particle system, decoded from a genome.
///
/// Spatial quantities are in units of a 512-pixel reference canvas; the
/// renderer rescales them to the requested canvas size.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AgentParams {
    pub agent_count: usize,
    pub mean_lifetime: u32,
    pub lifetime_spread: f64,
    pub speed: f64,
    pub inertia: f64,
    pub noise_scale: f64,
    pub noise_octaves: u32,
    pub curl_strength: f64,
    pub field_time_rate: f64,
    pub stroke_width: f64,
    pub stroke_opacity: f64,
    pub spawn_spread: f64,
    pub bias_angle: f64,
    pub bias_weight: f64,
}

/// `(min, max)` for each gene, in gene order.
pub const PARAM_RANGES: [(f64, f64); GENE_COUNT] = [
    (10.0, 400.0),
    (100.0, 2000.0),
    (0.0, 0.5),
    (0.5, 5.0),
    (0.0, 0.95),
    (0.001, 0.02),
    (1.0, 4.0),
    (0.0, 4.0),
    (0.0, 0.01),
    (0.5, 3.0),
    (0.05, 1.0),
    (0.05, 0.5),
    (0.0, TAU),
    (0.0, 0.6),
];

fn affine(g: f64, (lo, hi): (f64, f64)) -> f64 {
    lo + g * (hi - lo)
}

/// Decode a genome gene-by-gene through [`PARAM_RANGES`]. Integer fields are
/// rounded half away from zero.
pub fn map_genome(genome: &Genome) -> AgentParams {
    let g = genome.genes();
    let at = |i: usize| affine(g[i], PARAM_RANGES[i]);
    AgentParams {
        agent_count: at(0).round() as usize,
        mean_lifetime: at(1).round() as u32,
        lifetime_spread: at(2),
        speed: at(3),
        inertia: at(4),
        noise_scale: at(5),
        noise_octaves: at(6).round() as u32,
        curl_strength: at(7),
        field_time_rate: at(8),
        stroke_width: at(9),
        stroke_opacity: at(10),
        spawn_spread: at(11),
        bias_angle: at(12),
        bias_weight: at(13),
    }
}

impl AgentParams {
    /// Fields as `f64` in gene order, for range and monotonicity checks.
    pub fn as_array(&self) -> [f64; GENE_COUNT] {
        [
            self.agent_count as f64,
            f64::from(self.mean_lifetime),
            self.lifetime_spread,
            self.speed,
            self.inertia,
            self.noise_scale,
            f64::from(self.noise_octaves),
            self.curl_strength,
            self.field_time_rate,
            self.stroke_width,
            self.stroke_opacity,
            self.spawn_spread,
            self.bias_angle,
            self.bias_weight,
        ]
    }

    /// Upper bound on simulation steps: `agent_count * (mean * (1 + spread) + 1)`.
    pub fn max_steps(&self) -> u64 {
        let per = f64::from(self.mean_lifetime) * (1.0 + self.lifetime_spread) + 1.0;
        (self.agent_count as f64 * per).floor() as u64
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn endpoints_hit_range_limits() {
        let lo = map_genome(&Genome::uniform(0.0).unwrap()).as_array();
        let hi = map_genome(&Genome::uniform(1.0).unwrap()).as_array();
        for i in 0..GENE_COUNT {
            assert_eq!(lo[i], PARAM_RANGES[i].0, "min of field {i}");
            assert_eq!(hi[i], PARAM_RANGES[i].1, "max of field {i}");
        }
    }

    #[test]
    fn half_gene_agent_count() {
        let mut genes = [0.0; GENE_COUNT];
        genes[0] = 0.5;
        // 10 + 0.5 * 390 = 205
        assert_eq!(map_genome(&Genome::new(genes).unwrap()).agent_count, 205);
    }

    #[test]
    fn validation_errors() {
        assert!(Genome::from_slice(&[0.5; 13]).is_err());
        assert!(Genome::from_slice(&[0.5; 15]).is_err());
        let mut genes = [0.5; GENE_COUNT];
        genes[3] = 1.01;
        assert!(Genome::new(genes).is_err());
        genes[3] = f64::NAN;
        assert!(Genome::new(genes).is_err());
    }

    #[test]
    fn json_shape() {
        let g = Genome::uniform(0.25).unwrap();
        let s = serde_json::to_string(&g).unwrap();
        assert!(s.starts_with("{\"genes\":[0.25,"));
        let back: Genome = serde_json::from_str(&s).unwrap();
        assert_eq!(back, g);
        assert!(serde_json::from_str::<Genome>("{\"genes\":[0.1,0.2]}").is_err());
    }

    proptest! {
        #[test]
        fn mapping_is_monotone_per_gene(
            genes in prop::array::uniform14(0.0f64..=1.0),
            idx in 0usize..GENE_COUNT,
            bump in 0.0f64..=1.0,
        ) {
            let base = Genome::new(genes).unwrap();
            let mut raised = genes;
            raised[idx] = (raised[idx] + bump).min(1.0);
            let a = map_genome(&base).as_array();
            let b = map_genome(&Genome::new(raised).unwrap()).as_array();
            prop_assert!(b[idx] >= a[idx]);
            for i in 0..GENE_COUNT {
                prop_assert!(a[i] >= PARAM_RANGES[i].0 && a[i] <= PARAM_RANGES[i].1);
                if i != idx {
                    prop_assert_eq!(a[i], b[i]);
                }
            }
        }
    }
}
