//! Command-line harness for the gridpush simulator.

use std::fs;
use std::path::PathBuf;

use anyhow::Context;
use clap::{Parser, Subcommand, ValueEnum};

use gridpush_core::trace::{aggregate_runs, compute_metrics, render_timeline, EpisodeTrace};
use gridpush_core::world_model::{export_graph, GraphFormat, WorldModelGraph};
use gridpush_cli::config::ExperimentConfig;
use gridpush_cli::runner::run_experiment;

#[derive(Parser)]
#[command(
    name = "gridpush",
    version,
    about = "Multi-agent block-pushing simulator with negotiated task allocation"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a multi-episode experiment described by a TOML config.
    Run {
        /// Experiment config file.
        #[arg(long)]
        config: PathBuf,
        /// Output directory for traces, metrics, timelines and the world model.
        #[arg(long)]
        out: PathBuf,
        /// Override the config's random seed.
        #[arg(long)]
        seed: Option<u64>,
        /// Warm-start from a previously saved world-model file.
        #[arg(long)]
        world: Option<PathBuf>,
        /// Override the config's episode count.
        #[arg(long)]
        episodes: Option<u32>,
        /// Episodes after which to snapshot the world model (comma-separated).
        #[arg(long, value_delimiter = ',')]
        snapshot_episodes: Option<Vec<u32>>,
    },
    /// Render an execution timeline SVG from a trace file.
    RenderTimeline {
        /// Trace file (JSON lines) produced by `run`.
        #[arg(long)]
        trace: PathBuf,
        /// Path to write the SVG to.
        #[arg(long)]
        out: PathBuf,
    },
    /// Export a saved world-model graph.
    ExportGraph {
        /// World-model file produced by `run`.
        #[arg(long)]
        world: PathBuf,
        #[arg(long, value_enum)]
        format: ExportFormat,
        /// Output file; prints to stdout when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Recompute metrics and aggregate tables from a directory of traces.
    Metrics {
        /// Directory containing trace `.jsonl` files.
        #[arg(long)]
        traces: PathBuf,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum ExportFormat {
    Json,
    Dot,
}

impl From<ExportFormat> for GraphFormat {
    fn from(f: ExportFormat) -> Self {
        match f {
            ExportFormat::Json => GraphFormat::Json,
            ExportFormat::Dot => GraphFormat::Dot,
        }
    }
}

fn main() -> anyhow::Result<()> {
    match Cli::parse().command {
        Command::Run { config, out, seed, world, episodes, snapshot_episodes } => {
            let mut experiment = ExperimentConfig::load(&config)
                .with_context(|| format!("loading config {}", config.display()))?;
            if let Some(seed) = seed {
                experiment.seed = Some(seed);
            }
            if let Some(world) = world {
                experiment.world_model = Some(world);
            }
            if let Some(episodes) = episodes {
                experiment.episodes = episodes;
            }
            if let Some(snapshots) = snapshot_episodes {
                experiment.snapshot_episodes = snapshots;
            }
            let manifest = run_experiment(&experiment, &out).with_context(|| {
                format!("run aborted; partial results in {}", out.join("manifest.json").display())
            })?;
            println!(
                "completed {}/{} episodes (seed {})",
                manifest.episodes_completed, manifest.episodes_requested, manifest.seed
            );
            println!("artifacts written to {}", out.display());
        }
        Command::RenderTimeline { trace, out } => {
            let episode = EpisodeTrace::load(&trace)
                .with_context(|| format!("loading trace {}", trace.display()))?;
            fs::write(&out, render_timeline(&episode))
                .with_context(|| format!("writing {}", out.display()))?;
            println!("wrote {}", out.display());
        }
        Command::ExportGraph { world, format, out } => {
            let graph = WorldModelGraph::load(&world)
                .with_context(|| format!("loading world model {}", world.display()))?;
            let rendered = export_graph(&graph, format.into())?;
            match out {
                Some(path) => {
                    fs::write(&path, rendered)
                        .with_context(|| format!("writing {}", path.display()))?;
                    println!("wrote {}", path.display());
                }
                None => print!("{rendered}"),
            }
        }
        Command::Metrics { traces } => {
            let mut files: Vec<PathBuf> = fs::read_dir(&traces)
                .with_context(|| format!("reading {}", traces.display()))?
                .filter_map(|entry| entry.ok().map(|e| e.path()))
                .filter(|p| p.extension().is_some_and(|ext| ext == "jsonl"))
                .collect();
            files.sort();
            anyhow::ensure!(!files.is_empty(), "no .jsonl traces in {}", traces.display());

            let mut all = Vec::new();
            for (index, path) in files.iter().enumerate() {
                let trace = EpisodeTrace::load(path)
                    .with_context(|| format!("loading trace {}", path.display()))?;
                let episode = episode_number(path).unwrap_or(index as u32 + 1);
                let metrics = compute_metrics(&trace, episode)
                    .with_context(|| format!("computing metrics for {}", path.display()))?;
                println!(
                    "episode {}: env_steps={}, completion={:.0}%, seconds={:.2}",
                    metrics.episode,
                    metrics.env_steps,
                    metrics.completion_rate() * 100.0,
                    metrics.seconds
                );
                all.push(metrics);
            }
            let tables = aggregate_runs(&all);
            for (title, body) in [
                ("completion matrix", &tables.completion_matrix),
                ("episode series", &tables.episode_series),
                ("commitment patterns", &tables.commitment_patterns),
            ] {
                println!("\n# {title}\n{body}");
            }
        }
    }
    Ok(())
}

/// Trailing digits of the file stem, e.g. `trace_ep0003.jsonl` -> 3.
fn episode_number(path: &std::path::Path) -> Option<u32> {
    let stem = path.file_stem()?.to_str()?;
    let digits: String =
        stem.chars().rev().take_while(char::is_ascii_digit).collect::<Vec<_>>().into_iter().rev().collect();
    if digits.is_empty() {
        None
    } else {
        digits.parse().ok()
    }
}
