//! `agr`: generate instances, run observer strategies, ablate and report.

use std::path::PathBuf;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

use agr_core::harness::{
    aggregate_report, generate_instances, load_instances, read_csv, run_ablation_batch, run_batch, write_csv,
    write_instances, write_trace, BatchOptions, EpisodeConfig, ExperimentConfig, ResultRow,
};
use agr_core::planners::{Algorithm, LeafValue, RewardKind};

#[derive(Parser)]
#[command(name = "agr", version, about = "Active goal recognition experiments on grid worlds")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate the 50 instances of one configuration.
    Gen {
        /// Configuration label, e.g. S-E or L-H.
        #[arg(long)]
        config: ExperimentConfig,
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run one observer strategy over an instance directory.
    Run {
        #[arg(long)]
        instances: PathBuf,
        #[arg(long)]
        algo: Algorithm,
        #[arg(long)]
        out: PathBuf,
        /// Directory for per-episode JSON-lines traces.
        #[arg(long)]
        trace: Option<PathBuf>,
        /// Record wall-clock time per episode (makes output non-reproducible).
        #[arg(long)]
        timing: bool,
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Score joint-belief and passive inference on the same observations.
    Ablate {
        #[arg(long)]
        instances: PathBuf,
        #[arg(long)]
        strategy: Algorithm,
        #[arg(long)]
        out: PathBuf,
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Aggregate a results CSV into per-configuration means.
    Report {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long, value_enum, default_value_t = Format::Table)]
        format: Format,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Csv,
    Table,
}

#[derive(Args)]
struct CommonArgs {
    /// Worker threads (0 = all cores).
    #[arg(long, default_value_t = 0)]
    workers: usize,
    #[arg(long)]
    gamma: Option<f64>,
    #[arg(long = "ucb-c")]
    ucb_c: Option<f64>,
    #[arg(long)]
    iters: Option<usize>,
    #[arg(long)]
    depth: Option<usize>,
    /// Weight of the pose-entropy term in the planning reward.
    #[arg(long)]
    lambda: Option<f64>,
    #[arg(long)]
    epsilon: Option<f64>,
    #[arg(long)]
    beta: Option<f64>,
    #[arg(long)]
    theta: Option<f64>,
    /// Base seed for planner randomness.
    #[arg(long = "planner-seed")]
    planner_seed: Option<u64>,
    /// Use the distance heuristic instead of the belief reward in search.
    #[arg(long)]
    heuristic_reward: bool,
    /// Value new search nodes by their own reward only, instead of holding
    /// it constant over the remaining depth.
    #[arg(long)]
    immediate_leaf: bool,
}

impl CommonArgs {
    fn episode_config(&self) -> Result<EpisodeConfig> {
        let mut cfg = EpisodeConfig::default();
        let p = &mut cfg.planner;
        if let Some(v) = self.gamma {
            p.gamma = v;
        }
        if let Some(v) = self.ucb_c {
            p.ucb_c = v;
        }
        if let Some(v) = self.iters {
            p.iterations = v;
        }
        if let Some(v) = self.depth {
            p.max_depth = v;
        }
        if let Some(v) = self.lambda {
            p.entropy_weight = v;
        }
        if let Some(v) = self.epsilon {
            p.epsilon = v;
        }
        if let Some(v) = self.planner_seed {
            p.rng_seed = v;
        }
        if self.heuristic_reward {
            p.reward = RewardKind::Heuristic;
        }
        if self.immediate_leaf {
            p.leaf_value = LeafValue::Immediate;
        }
        p.validate()?;
        if let Some(v) = self.beta {
            cfg.beta = v;
        }
        if let Some(v) = self.theta {
            anyhow::ensure!(v > 0.0 && v < 1.0, "theta must lie in (0, 1)");
            cfg.metrics.theta = v;
        }
        Ok(cfg)
    }
}

fn main() -> Result<()> {
    match Cli::parse().command {
        Command::Gen { config, seed, out } => {
            let specs = generate_instances(seed, config)?;
            write_instances(&out, &specs).with_context(|| format!("writing {}", out.display()))?;
            eprintln!("wrote {} instances to {}", specs.len(), out.display());
        }
        Command::Run { instances, algo, out, trace, timing, common } => {
            let cfg = common.episode_config()?;
            let specs = load_instances(&instances).with_context(|| format!("loading {}", instances.display()))?;
            let opts = BatchOptions { workers: common.workers, timing };
            let outcomes = run_batch(&specs, algo, &cfg, opts)?;
            if let Some(dir) = &trace {
                for (spec, o) in specs.iter().zip(&outcomes) {
                    write_trace(dir, spec, &o.record)?;
                }
            }
            let rows: Vec<ResultRow> = outcomes.into_iter().map(|o| o.row).collect();
            write_csv(&out, &rows)?;
            eprintln!("{} episodes of {algo} -> {}", rows.len(), out.display());
        }
        Command::Ablate { instances, strategy, out, common } => {
            let cfg = common.episode_config()?;
            let specs = load_instances(&instances).with_context(|| format!("loading {}", instances.display()))?;
            let rows = run_ablation_batch(&specs, strategy, &cfg, common.workers)?;
            write_csv(&out, &rows)?;
            eprintln!("{} ablation episodes -> {}", rows.len(), out.display());
        }
        Command::Report { input, format } => {
            let rows: Vec<ResultRow> = read_csv(&input).with_context(|| format!("reading {}", input.display()))?;
            let report = aggregate_report(&rows);
            match format {
                Format::Csv => print!("{}", report.to_csv()),
                Format::Table => print!("{}", report.to_table()),
            }
        }
    }
    Ok(())
}
