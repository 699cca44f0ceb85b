use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::corpus::{load_embedding, load_weights};
use crate::drawgen::render;
use crate::embedding::FeatureExtractor;
use crate::error::{Error, IoContext, Result};
use crate::qd::{
    Elite, EliteArchive, GaOutcome, Individual, LineDrawing, Mode, QdOutcome, RunConfig,
    StructuralComplexity, kmeans, run_ga, run_qd,
};

pub const CONFIG_FILE: &str = "config.txt";
pub const QD_LOG: &str = "log.csv";
pub const GA_LOG: &str = "ga_log.csv";
pub const ARCHIVE_FILE: &str = "archive.json";
pub const SNAPSHOT_DIR: &str = "snapshots";
pub const ELITE_DIR: &str = "elites";
pub const CHAMPION_PNG: &str = "champion.png";
pub const CHAMPION_JSON: &str = "champion.json";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SnapshotNiche {
    pub niche: usize,
    pub centroid: [f64; 2],
    pub elite: Option<Elite>,
}

/// Archive state after one generation, as persisted.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Snapshot {
    pub generation: u32,
    pub niches: Vec<SnapshotNiche>,
}

impl From<&EliteArchive> for Snapshot {
    fn from(a: &EliteArchive) -> Self {
        Snapshot {
            generation: a.generation,
            niches: a
                .niches
                .iter()
                .enumerate()
                .map(|(i, n)| SnapshotNiche {
                    niche: i,
                    centroid: n.centroid,
                    elite: n.elite.clone(),
                })
                .collect(),
        }
    }
}

pub fn snapshot_path(run_dir: &Path, generation: u32) -> PathBuf {
    run_dir.join(SNAPSHOT_DIR).join(format!("gen_{generation:03}.json"))
}

pub fn read_snapshot(path: &Path) -> Result<Snapshot> {
    let text = std::fs::read_to_string(path).at(path)?;
    serde_json::from_str(&text).map_err(|e| Error::Format(format!("{}: {e}", path.display())))
}

#[derive(Debug, Clone)]
pub enum RunOutput {
    Qd(QdOutcome),
    Ga(GaOutcome),
}

impl RunOutput {
    pub fn as_qd(&self) -> Option<&QdOutcome> {
        match self {
            RunOutput::Qd(o) => Some(o),
            RunOutput::Ga(_) => None,
        }
    }

    pub fn as_ga(&self) -> Option<&GaOutcome> {
        match self {
            RunOutput::Ga(o) => Some(o),
            RunOutput::Qd(_) => None,
        }
    }
}

fn write(path: &Path, bytes: impl AsRef<[u8]>) -> Result<()> {
    std::fs::write(path, bytes).at(path)
}

fn to_json<T: Serialize>(v: &T) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("plain data serializes");
    s.push('\n');
    s
}

/// Build the feature extractor and initial niche centroids of a QD run.
pub fn prepare_qd(config: &RunConfig) -> Result<(FeatureExtractor, Vec<[f64; 2]>)> {
    let missing = |what: &str| Error::Config(vec![format!("{what} is required in qd mode")]);
    let weights = load_weights(config.weights.as_deref().ok_or_else(|| missing("weights"))?)?;
    let corpus = load_embedding(config.embedding.as_deref().ok_or_else(|| missing("embedding"))?)?;
    let km = kmeans(&corpus.map_positions(), config.k, config.master_seed)?;
    let extractor = FeatureExtractor::new(weights, corpus, config.neighbours)?;
    Ok((extractor, km.centroids))
}

/// Execute one run and write its directory.
pub fn cmd_run(config: &RunConfig, out_dir: &Path) -> Result<RunOutput> {
    config.validate()?;
    std::fs::create_dir_all(out_dir).at(out_dir)?;
    write(&out_dir.join(CONFIG_FILE), config.to_text())?;
    let drawing = LineDrawing {
        canvas: config.canvas,
        seed: config.render_seed,
    };
    let fitness = StructuralComplexity {
        resolution: config.fitness_resolution,
    };
    match config.mode {
        Mode::QualityDiversity => {
            let (extractor, centroids) = prepare_qd(config)?;
            let out = run_qd(config, &centroids, &drawing, &fitness, &extractor)?;
            write_qd(config, &out, out_dir)?;
            Ok(RunOutput::Qd(out))
        }
        Mode::FitnessOnly => {
            let out = run_ga(config, &drawing, &fitness)?;
            write_ga(config, &out, out_dir)?;
            Ok(RunOutput::Ga(out))
        }
    }
}

fn write_qd(config: &RunConfig, out: &QdOutcome, dir: &Path) -> Result<()> {
    write(&dir.join(QD_LOG), out.log.to_csv())?;
    let snaps = dir.join(SNAPSHOT_DIR);
    std::fs::create_dir_all(&snaps).at(&snaps)?;
    for a in &out.history {
        write(&snapshot_path(dir, a.generation), to_json(&Snapshot::from(a)))?;
    }
    write(&dir.join(ARCHIVE_FILE), to_json(&Snapshot::from(&out.archive)))?;
    let elites = dir.join(ELITE_DIR);
    std::fs::create_dir_all(&elites).at(&elites)?;
    for (i, n) in out.archive.niches.iter().enumerate() {
        if let Some(e) = &n.elite {
            render(&e.genome, config.canvas, config.render_seed)?
                .write_png(elites.join(format!("niche_{i:02}.png")))?;
        }
    }
    Ok(())
}

fn write_ga(config: &RunConfig, out: &GaOutcome, dir: &Path) -> Result<()> {
    write(&dir.join(GA_LOG), out.log_csv())?;
    write(&dir.join(CHAMPION_JSON), to_json(&out.champion))?;
    render(&out.champion.genome, config.canvas, config.render_seed)?.write_png(dir.join(CHAMPION_PNG))
}

pub fn read_champion(run_dir: &Path) -> Result<Individual> {
    let path = run_dir.join(CHAMPION_JSON);
    let text = std::fs::read_to_string(&path).at(&path)?;
    serde_json::from_str(&text).map_err(|e| Error::Format(format!("{}: {e}", path.display())))
}

/// Subdirectory name of a repeated run.
pub fn seed_dir(seed: u64) -> String {
    format!("seed_{seed:03}")
}

/// `runs` executions with master seeds `master_seed, master_seed + 1, ...`,
/// each into its own `seed_NNN` subdirectory. A single run writes `out_dir`
/// directly.
pub fn cmd_run_seeds(config: &RunConfig, out_dir: &Path, runs: usize) -> Result<Vec<(PathBuf, RunOutput)>> {
    if runs == 0 {
        return Err(Error::Config(vec!["runs must be >= 1".to_string()]));
    }
    if runs == 1 {
        return Ok(vec![(out_dir.to_path_buf(), cmd_run(config, out_dir)?)]);
    }
    (0..runs as u64)
        .map(|i| {
            let mut c = config.clone();
            c.master_seed = config.master_seed.wrapping_add(i);
            let dir = out_dir.join(seed_dir(c.master_seed));
            cmd_run(&c, &dir).map(|o| (dir, o))
        })
        .collect()
}
