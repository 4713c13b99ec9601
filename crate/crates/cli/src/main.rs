//! `kinlink`: generate, build-graph, cluster, evaluate and sweep, driven by a
//! single TOML config.

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

use kinlink::config::{ClustererKind, Overrides, PipelineConfig};
use kinlink::greedy::SelectMethod;
use kinlink::pipeline;
use kinlink::star::{ResolveMethod, SortMethod};

#[derive(Parser, Debug)]
#[command(
    name = "kinlink",
    version,
    about = "Temporal record linkage of birth registers"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Write synthetic records and ground truth
    Generate(Common),
    /// Block, score and write the similarity graph
    BuildGraph(Common),
    /// Cluster the similarity graph
    Cluster(Common),
    /// Score a clustering against the ground truth
    Evaluate(Common),
    /// Precision/recall over the threshold sweep
    Sweep {
        #[command(flatten)]
        common: Common,
        /// Emit only the precision/recall table
        #[arg(long)]
        plot_data: bool,
    },
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum OnOff {
    On,
    Off,
}

#[derive(Args, Debug)]
struct Common {
    /// Pipeline config file (TOML)
    #[arg(short, long)]
    config: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    /// Similarity threshold s_min
    #[arg(long)]
    threshold: Option<f64>,
    #[arg(long, value_enum)]
    temporal: Option<OnOff>,
    /// star or greedy
    #[arg(long)]
    clusterer: Option<ClustererKind>,
    /// avr-sim-first, degree-first or comb
    #[arg(long)]
    sort_method: Option<SortMethod>,
    /// avr-all, avr-high or edge-ratio
    #[arg(long)]
    resolve_method: Option<ResolveMethod>,
    /// next, max-sim or avr-sim
    #[arg(long)]
    select_method: Option<SelectMethod>,
}

impl Common {
    fn load(&self) -> Result<PipelineConfig> {
        let mut config = match &self.config {
            Some(path) => PipelineConfig::load(path)
                .with_context(|| format!("loading config {}", path.display()))?,
            None => PipelineConfig::default(),
        };
        config.apply(&Overrides {
            seed: self.seed,
            threshold: self.threshold,
            temporal: self.temporal.map(|t| matches!(t, OnOff::On)),
            clusterer: self.clusterer,
            sort_method: self.sort_method,
            resolve_method: self.resolve_method,
            select_method: self.select_method,
        })?;
        Ok(config)
    }
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Generate(common) => {
            let (records, gt) = pipeline::cmd_generate(&common.load()?)?;
            println!("wrote {}", records.display());
            println!("wrote {}", gt.display());
        }
        Command::BuildGraph(common) => {
            let path = pipeline::cmd_build_graph(&common.load()?)?;
            println!("wrote {}", path.display());
        }
        Command::Cluster(common) => {
            let path = pipeline::cmd_cluster(&common.load()?)?;
            println!("wrote {}", path.display());
        }
        Command::Evaluate(common) => {
            let (report, path) = pipeline::cmd_evaluate(&common.load()?)?;
            println!(
                "precision {:.4}  recall {:.4}  (tp {} fp {} fn {})",
                report.precision,
                report.recall,
                report.counts.true_positives,
                report.counts.false_positives,
                report.counts.false_negatives
            );
            println!("wrote {}", path.display());
        }
        Command::Sweep { common, plot_data } => {
            let (reports, paths) = pipeline::cmd_sweep(&common.load()?, plot_data)?;
            println!("{} sweep points", reports.len());
            for p in paths {
                println!("wrote {}", p.display());
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
