use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use qdart::app::{self, CorpusSpec};
use qdart::drawgen::{Genome, render};
use qdart::embedding::{EncoderWeights, TsneParams, check_parity, export_parity_pack};
use qdart::qd::RunConfig;
use qdart::{Error, Result};

#[derive(Parser)]
#[command(name = "qdart", version, about = "Quality-diversity search over agent-based line drawings")]
struct Cli {
    /// Worker threads (default: all cores).
    #[arg(long, global = true, env = "QDART_THREADS")]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Render a random-genome corpus with a manifest.
    Corpus {
        #[arg(long, default_value_t = 4000)]
        count: usize,
        #[arg(long, default_value_t = 512)]
        canvas: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 0)]
        render_seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Encode a corpus and fit its 2-D embedding.
    Embed {
        #[arg(long)]
        corpus: PathBuf,
        #[arg(long)]
        weights: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 30.0)]
        perplexity: f64,
        #[arg(long, default_value_t = 1000)]
        iterations: usize,
        #[arg(long)]
        learning_rate: Option<f64>,
    },
    /// Run the QD search or the GA control.
    Run(RunArgs),
    /// Draw time series, snapshot montages and champion grids as SVG.
    Plot {
        /// Run directories, or parents of seed_* run directories.
        #[arg(required = true)]
        runs: Vec<PathBuf>,
        #[arg(long)]
        out: PathBuf,
        /// Comma-separated snapshot generations.
        #[arg(long, value_delimiter = ',', default_values_t = app::DEFAULT_SNAPSHOTS)]
        generations: Vec<u32>,
    },
    /// Structural-complexity fitness of PNG files, as CSV.
    Metrics {
        #[arg(required = true)]
        images: Vec<PathBuf>,
        #[arg(long, default_value_t = qdart::metrics::FITNESS_RESOLUTION)]
        resolution: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Configuration files.
    Config {
        #[command(subcommand)]
        command: ConfigCommand,
    },
    /// Render one genome to PNG.
    Render {
        /// 14 comma-separated genes in [0, 1].
        #[arg(long, value_delimiter = ',', required = true)]
        genes: Vec<f64>,
        #[arg(long, default_value_t = 512)]
        canvas: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Encoder weight files.
    Weights {
        #[command(subcommand)]
        command: WeightsCommand,
    },
    /// Encoder parity packs.
    Parity {
        #[command(subcommand)]
        command: ParityCommand,
    },
}

#[derive(Subcommand)]
enum ConfigCommand {
    /// Write the default configuration.
    Init {
        /// Output file; stdout when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Subcommand)]
enum WeightsCommand {
    /// Fixed random encoder weights.
    Stub {
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Subcommand)]
enum ParityCommand {
    /// Compare this encoder against a pack's reference latents.
    Check {
        #[arg(long)]
        dir: PathBuf,
        #[arg(long)]
        weights: PathBuf,
        #[arg(long, default_value_t = 1e-4)]
        tolerance: f64,
    },
    /// Write a pack from this encoder.
    Export {
        #[arg(long)]
        dir: PathBuf,
        #[arg(long)]
        weights: PathBuf,
        #[arg(long, default_value_t = 32)]
        count: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

#[derive(Args)]
struct RunArgs {
    /// Configuration file; defaults apply when omitted.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    out: PathBuf,
    /// Repetitions with consecutive master seeds.
    #[arg(long, default_value_t = 1)]
    runs: usize,
    #[arg(long)]
    mode: Option<String>,
    #[arg(long)]
    k: Option<String>,
    #[arg(long)]
    e: Option<String>,
    #[arg(long)]
    lambda: Option<String>,
    #[arg(long)]
    r: Option<String>,
    #[arg(long)]
    f: Option<String>,
    #[arg(long)]
    alpha: Option<String>,
    #[arg(long)]
    centroid_update: Option<String>,
    #[arg(long)]
    elitism: Option<String>,
    #[arg(long)]
    master_seed: Option<String>,
    #[arg(long)]
    render_seed: Option<String>,
    #[arg(long)]
    canvas: Option<String>,
    #[arg(long)]
    fitness_resolution: Option<String>,
    #[arg(long)]
    neighbours: Option<String>,
    #[arg(long)]
    weights: Option<String>,
    #[arg(long)]
    embedding: Option<String>,
}

impl RunArgs {
    fn overrides(&self) -> [(&'static str, Option<&String>); 16] {
        [
            ("mode", self.mode.as_ref()),
            ("k", self.k.as_ref()),
            ("e", self.e.as_ref()),
            ("lambda", self.lambda.as_ref()),
            ("r", self.r.as_ref()),
            ("f", self.f.as_ref()),
            ("alpha", self.alpha.as_ref()),
            ("centroid_update", self.centroid_update.as_ref()),
            ("elitism", self.elitism.as_ref()),
            ("master_seed", self.master_seed.as_ref()),
            ("render_seed", self.render_seed.as_ref()),
            ("canvas", self.canvas.as_ref()),
            ("fitness_resolution", self.fitness_resolution.as_ref()),
            ("neighbours", self.neighbours.as_ref()),
            ("weights", self.weights.as_ref()),
            ("embedding", self.embedding.as_ref()),
        ]
    }

    /// Config file (or defaults) with command-line overrides; all problems
    /// are reported together.
    fn config(&self) -> Result<RunConfig> {
        let mut cfg = match &self.config {
            Some(p) => RunConfig::load(p)?,
            None => RunConfig::default(),
        };
        let mut errors = Vec::new();
        for (key, value) in self.overrides() {
            if let Some(Err(e)) = value.map(|v| cfg.set(key, v)) {
                errors.push(format!("--{}: {e}", key.replace('_', "-")));
            }
        }
        errors.extend(cfg.problems());
        if errors.is_empty() { Ok(cfg) } else { Err(Error::Config(errors)) }
    }
}

fn write_or_print(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(p) => std::fs::write(p, text).map_err(|source| Error::Io {
            path: p.to_path_buf(),
            source,
        }),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn execute(command: Command) -> Result<()> {
    match command {
        Command::Corpus {
            count,
            canvas,
            seed,
            render_seed,
            out,
        } => {
            let rows = app::cmd_corpus(
                &CorpusSpec {
                    count,
                    canvas,
                    seed,
                    render_seed,
                },
                &out,
            )?;
            println!("wrote {} images to {}", rows.len(), out.display());
        }
        Command::Embed {
            corpus,
            weights,
            out,
            seed,
            perplexity,
            iterations,
            learning_rate,
        } => {
            let params = TsneParams {
                perplexity,
                iterations,
                learning_rate,
                ..TsneParams::default()
            };
            let fit = app::cmd_embed(&corpus, &app::load_weights(&weights)?, &params, seed, &out)?;
            let kl = fit.tsne.kl_trace.last().map_or(f64::NAN, |(_, kl)| *kl);
            println!("embedded {} images, final KL {kl:.4}, wrote {}", fit.embedding.len(), out.display());
        }
        Command::Run(args) => {
            let cfg = args.config()?;
            for (dir, out) in app::cmd_run_seeds(&cfg, &args.out, args.runs)? {
                match out {
                    app::RunOutput::Qd(o) => println!(
                        "{}: populated {}/{}, mean elite fitness {:.4}",
                        dir.display(),
                        o.archive.populated(),
                        o.archive.k(),
                        o.archive.mean_elite_fitness()
                    ),
                    app::RunOutput::Ga(o) => {
                        println!("{}: champion fitness {:.4}", dir.display(), o.champion.fitness)
                    }
                }
            }
        }
        Command::Plot {
            runs,
            out,
            generations,
        } => {
            for p in app::cmd_plot(&runs, &out, &generations)? {
                println!("wrote {}", p.display());
            }
        }
        Command::Metrics {
            images,
            resolution,
            out,
        } => {
            let rows = app::cmd_metrics(&images, resolution)?;
            write_or_print(out.as_deref(), &app::metrics_csv(&rows))?;
        }
        Command::Config {
            command: ConfigCommand::Init { out },
        } => write_or_print(out.as_deref(), &RunConfig::default().to_text())?,
        Command::Render {
            genes,
            canvas,
            seed,
            out,
        } => render(&Genome::from_slice(&genes)?, canvas, seed)?.write_png(&out)?,
        Command::Weights {
            command: WeightsCommand::Stub { seed, out },
        } => EncoderWeights::stub(seed).to_tensors().write(&out)?,
        Command::Parity { command } => match command {
            ParityCommand::Check {
                dir,
                weights,
                tolerance,
            } => {
                let report = check_parity(&dir, &app::load_weights(&weights)?)?;
                println!(
                    "{} rows, max relative error {:.3e} ({})",
                    report.rows,
                    report.max_relative_error,
                    report.worst_image.as_deref().unwrap_or("-")
                );
                if !report.passes(tolerance) {
                    return Err(Error::Validation(format!(
                        "parity error {:.3e} exceeds tolerance {tolerance:.1e}",
                        report.max_relative_error
                    )));
                }
            }
            ParityCommand::Export {
                dir,
                weights,
                count,
                seed,
            } => {
                let images = (0..count)
                    .map(|i| {
                        render(&app::corpus_genome(seed, i), 256, 0)?
                            .resample_area(qdart::embedding::INPUT_SIZE, qdart::embedding::INPUT_SIZE)
                    })
                    .collect::<Result<Vec<_>>>()?;
                export_parity_pack(&dir, &images, &app::load_weights(&weights)?)?;
            }
        },
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) if !e.use_stderr() => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let _ = e.print();
            let message = e.kind().to_string();
            eprintln!("error: code=2 kind=config message=command line: {message}");
            return ExitCode::from(2);
        }
    };
    let pool = cli
        .threads
        .map(|n| rayon::ThreadPoolBuilder::new().num_threads(n).build_global());
    if let Some(Err(e)) = pool {
        eprintln!("error: code=2 kind=config message=thread pool: {e}");
        return ExitCode::from(2);
    }
    match execute(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let message = e.to_string().replace('\n', " ");
            eprintln!("error: code={} kind={} message={message}", e.exit_code(), e.kind().as_str());
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
