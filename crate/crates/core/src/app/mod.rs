//! Command implementations behind the `qdart` binary: corpus generation,
//! embedding, runs and figures. Each command reads and writes plain files so
//! a run directory can be reproduced from its `config.txt` alone.

mod corpus;
mod plot;
mod run;

pub use corpus::{
    CorpusSpec, IMAGE_DIR, MANIFEST, ManifestRow, THUMB_DIR, cmd_corpus, cmd_embed, cmd_metrics,
    corpus_genome, load_embedding, load_weights, metrics_csv, read_manifest,
};
pub use plot::{
    DEFAULT_SNAPSHOTS, Series, champion_svg, cmd_plot, expand_run_dirs, mean_std, read_qd_log,
    snapshot_svg, timeseries_svg,
};
pub use run::{
    ARCHIVE_FILE, CHAMPION_JSON, CHAMPION_PNG, CONFIG_FILE, ELITE_DIR, GA_LOG, QD_LOG, RunOutput,
    SNAPSHOT_DIR, Snapshot, SnapshotNiche, cmd_run, cmd_run_seeds, prepare_qd, read_champion,
    read_snapshot, seed_dir, snapshot_path,
};
