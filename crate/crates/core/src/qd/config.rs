//! Run configuration and its flat `key = value` file format.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use super::archive::CentroidUpdate;
use crate::drawgen::GENE_COUNT;
use crate::embedding::DEFAULT_NEIGHBOURS;
use crate::error::{Error, IoContext, Result};
use crate::metrics::FITNESS_RESOLUTION;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    QualityDiversity,
    FitnessOnly,
}

impl Mode {
    pub fn as_str(self) -> &'static str {
        match self {
            Mode::QualityDiversity => "qd",
            Mode::FitnessOnly => "ga",
        }
    }
}

impl FromStr for Mode {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "qd" | "quality-diversity" => Ok(Mode::QualityDiversity),
            "ga" | "fitness-only" | "fitness-only-ga" => Ok(Mode::FitnessOnly),
            _ => Err(format!("unknown mode `{s}` (expected qd or ga)")),
        }
    }
}

impl CentroidUpdate {
    pub fn as_str(self) -> &'static str {
        match self {
            CentroidUpdate::PerAcceptance => "per-acceptance",
            CentroidUpdate::PerGeneration => "per-generation",
        }
    }
}

impl FromStr for CentroidUpdate {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "per-acceptance" => Ok(CentroidUpdate::PerAcceptance),
            "per-generation" => Ok(CentroidUpdate::PerGeneration),
            _ => Err(format!(
                "unknown centroid_update `{s}` (expected per-acceptance or per-generation)"
            )),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub mode: Mode,
    /// Niche count.
    pub k: usize,
    /// Generations.
    pub e: usize,
    /// Population size per generation.
    pub lambda: usize,
    /// Per-allele mutation probability.
    pub r: f64,
    /// Maximum allele change of a mutation.
    pub f: f64,
    /// Centroid step toward an accepted elite.
    pub alpha: f64,
    pub centroid_update: CentroidUpdate,
    /// GA only: copy the best individual unmutated into the next generation.
    pub elitism: bool,
    pub master_seed: u64,
    /// Seed of the renderer's particle spawns and flow field; shared by all
    /// genomes so a genome always yields the same drawing.
    pub render_seed: u64,
    pub canvas: usize,
    pub fitness_resolution: usize,
    pub neighbours: usize,
    pub weights: Option<PathBuf>,
    pub embedding: Option<PathBuf>,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            mode: Mode::QualityDiversity,
            k: 25,
            e: 50,
            lambda: 15,
            r: 1.0 / GENE_COUNT as f64,
            f: 0.25,
            alpha: 0.25,
            centroid_update: CentroidUpdate::PerAcceptance,
            elitism: true,
            master_seed: 0,
            render_seed: 0,
            canvas: 512,
            fitness_resolution: FITNESS_RESOLUTION,
            neighbours: DEFAULT_NEIGHBOURS,
            weights: Some(PathBuf::from("weights.qdvw")),
            embedding: Some(PathBuf::from("embedding.qdvw")),
        }
    }
}

/// Parse a real number or a fraction `a/b`.
fn parse_real(s: &str) -> std::result::Result<f64, String> {
    let v = match s.split_once('/') {
        Some((a, b)) => {
            let a: f64 = a.trim().parse().map_err(|_| format!("`{s}` is not a number"))?;
            let b: f64 = b.trim().parse().map_err(|_| format!("`{s}` is not a number"))?;
            a / b
        }
        None => s.parse().map_err(|_| format!("`{s}` is not a number"))?,
    };
    if v.is_finite() {
        Ok(v)
    } else {
        Err(format!("`{s}` is not finite"))
    }
}

fn parse_bool(s: &str) -> std::result::Result<bool, String> {
    match s {
        "true" | "yes" | "1" | "on" => Ok(true),
        "false" | "no" | "0" | "off" => Ok(false),
        _ => Err(format!("`{s}` is not a boolean")),
    }
}

fn parse_int<T: FromStr>(s: &str) -> std::result::Result<T, String> {
    s.parse().map_err(|_| format!("`{s}` is not a non-negative integer"))
}

fn parse_path(s: &str) -> Option<PathBuf> {
    (!s.is_empty() && s != "none").then(|| PathBuf::from(s))
}

impl RunConfig {
    pub const KEYS: [&'static str; 16] = [
        "mode",
        "k",
        "e",
        "lambda",
        "r",
        "f",
        "alpha",
        "centroid_update",
        "elitism",
        "master_seed",
        "render_seed",
        "canvas",
        "fitness_resolution",
        "neighbours",
        "weights",
        "embedding",
    ];

    /// Apply one `key = value` pair.
    pub fn set(&mut self, key: &str, value: &str) -> std::result::Result<(), String> {
        let v = value.trim();
        let wrap = |e: String| format!("{key}: {e}");
        match key {
            "mode" => self.mode = v.parse().map_err(wrap)?,
            "k" => self.k = parse_int(v).map_err(wrap)?,
            "e" => self.e = parse_int(v).map_err(wrap)?,
            "lambda" => self.lambda = parse_int(v).map_err(wrap)?,
            "r" => self.r = parse_real(v).map_err(wrap)?,
            "f" => self.f = parse_real(v).map_err(wrap)?,
            "alpha" => self.alpha = parse_real(v).map_err(wrap)?,
            "centroid_update" => self.centroid_update = v.parse().map_err(wrap)?,
            "elitism" => self.elitism = parse_bool(v).map_err(wrap)?,
            "master_seed" => self.master_seed = parse_int(v).map_err(wrap)?,
            "render_seed" => self.render_seed = parse_int(v).map_err(wrap)?,
            "canvas" => self.canvas = parse_int(v).map_err(wrap)?,
            "fitness_resolution" => self.fitness_resolution = parse_int(v).map_err(wrap)?,
            "neighbours" => self.neighbours = parse_int(v).map_err(wrap)?,
            "weights" => self.weights = parse_path(v),
            "embedding" => self.embedding = parse_path(v),
            _ => return Err(format!("unknown key `{key}`")),
        }
        Ok(())
    }

    /// Parse the text format, starting from defaults. Every bad line and
    /// every failed constraint is reported.
    pub fn parse(text: &str) -> Result<Self> {
        let mut cfg = RunConfig::default();
        let mut errors = Vec::new();
        for (n, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            match line.split_once('=') {
                Some((k, v)) => {
                    if let Err(e) = cfg.set(k.trim(), v) {
                        errors.push(format!("line {}: {e}", n + 1));
                    }
                }
                None => errors.push(format!("line {}: expected `key = value`", n + 1)),
            }
        }
        errors.extend(cfg.problems());
        if errors.is_empty() {
            Ok(cfg)
        } else {
            Err(Error::Config(errors))
        }
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let mut cfg = Self::parse(&std::fs::read_to_string(path).at(path)?)?;
        // Relative artifact paths are resolved against the config's directory.
        let base = path.parent().unwrap_or(Path::new(""));
        for p in [&mut cfg.weights, &mut cfg.embedding].into_iter().flatten() {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        }
        Ok(cfg)
    }

    /// All violated constraints.
    pub fn problems(&self) -> Vec<String> {
        let mut p = Vec::new();
        if self.k < 2 {
            p.push(format!("k must be >= 2, got {}", self.k));
        }
        if self.e < 1 {
            p.push(format!("e must be >= 1, got {}", self.e));
        }
        if self.lambda < 1 {
            p.push(format!("lambda must be >= 1, got {}", self.lambda));
        }
        if !(0.0..=1.0).contains(&self.r) {
            p.push(format!("r must be in [0, 1], got {}", self.r));
        }
        if !(self.f > 0.0 && self.f <= 1.0) {
            p.push(format!("f must be in (0, 1], got {}", self.f));
        }
        if !(0.0..=1.0).contains(&self.alpha) {
            p.push(format!("alpha must be in [0, 1], got {}", self.alpha));
        }
        if self.canvas < crate::drawgen::MIN_CANVAS {
            p.push(format!(
                "canvas must be >= {}, got {}",
                crate::drawgen::MIN_CANVAS,
                self.canvas
            ));
        }
        if self.fitness_resolution < 8 {
            p.push(format!(
                "fitness_resolution must be >= 8, got {}",
                self.fitness_resolution
            ));
        }
        if self.neighbours < 1 {
            p.push("neighbours must be >= 1".to_string());
        }
        if self.mode == Mode::QualityDiversity {
            if self.weights.is_none() {
                p.push("weights is required in qd mode".to_string());
            }
            if self.embedding.is_none() {
                p.push("embedding is required in qd mode".to_string());
            }
        }
        p
    }

    pub fn validate(&self) -> Result<()> {
        let p = self.problems();
        if p.is_empty() { Ok(()) } else { Err(Error::Config(p)) }
    }

    /// Render as the text format; `r` is written exactly.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let path = |p: &Option<PathBuf>| {
            p.as_ref()
                .map_or("none".to_string(), |p| p.display().to_string())
        };
        let _ = writeln!(s, "# qdart run configuration");
        let _ = writeln!(s, "mode = {}", self.mode.as_str());
        let _ = writeln!(s, "k = {}", self.k);
        let _ = writeln!(s, "e = {}", self.e);
        let _ = writeln!(s, "lambda = {}", self.lambda);
        let _ = writeln!(s, "r = {:?}", self.r);
        let _ = writeln!(s, "f = {:?}", self.f);
        let _ = writeln!(s, "alpha = {:?}", self.alpha);
        let _ = writeln!(s, "centroid_update = {}", self.centroid_update.as_str());
        let _ = writeln!(s, "elitism = {}", self.elitism);
        let _ = writeln!(s, "master_seed = {}", self.master_seed);
        let _ = writeln!(s, "render_seed = {}", self.render_seed);
        let _ = writeln!(s, "canvas = {}", self.canvas);
        let _ = writeln!(s, "fitness_resolution = {}", self.fitness_resolution);
        let _ = writeln!(s, "neighbours = {}", self.neighbours);
        let _ = writeln!(s, "weights = {}", path(&self.weights));
        let _ = writeln!(s, "embedding = {}", path(&self.embedding));
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_round_trip() {
        let d = RunConfig::default();
        assert_eq!(RunConfig::parse(&d.to_text()).unwrap(), d);
        assert_eq!(d.r, 1.0 / 14.0);
        assert_eq!((d.k, d.e, d.lambda, d.f), (25, 50, 15, 0.25));
    }

    #[test]
    fn fraction_and_comments() {
        let c = RunConfig::parse("r = 1/14 # one allele on average\nk=10\n").unwrap();
        assert_eq!(c.r, 1.0 / 14.0);
        assert_eq!(c.k, 10);
    }

    #[test]
    fn every_error_is_listed() {
        let err = RunConfig::parse("k = 1\ne = 0\nf = 0\nbogus = 3\nlambda = x\nmode = ga\n")
            .unwrap_err();
        let Error::Config(list) = err else { panic!("wrong kind") };
        let joined = list.join("\n");
        for needle in ["k must be", "e must be", "f must be", "unknown key `bogus`", "lambda:"] {
            assert!(joined.contains(needle), "missing {needle} in {joined}");
        }
        assert_eq!(list.len(), 5);
    }

    #[test]
    fn qd_mode_requires_artifacts() {
        let err = RunConfig::parse("weights = none\nembedding = none\n").unwrap_err();
        assert!(err.to_string().contains("weights is required"));
        assert!(err.to_string().contains("embedding is required"));
        assert!(RunConfig::parse("mode = ga\nweights = none\nembedding = none\n").is_ok());
    }
}
