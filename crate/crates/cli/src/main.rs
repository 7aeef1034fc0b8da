use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};
use multifuse::commands::absolute;
use multifuse::{run, Command, RunConfig};

/// Build, fuse, cluster and compare article similarity layers.
#[derive(Parser)]
#[command(name = "multifuse", version)]
struct Cli {
    /// TOML run configuration.
    #[arg(long, short, global = true)]
    config: Option<PathBuf>,
    /// Overrides `output_dir`.
    #[arg(long, global = true)]
    output_dir: Option<PathBuf>,
    /// Worker threads (`MULTIFUSE_THREADS` wins when set).
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Overrides any config key, e.g. `--set snf.iterations=30`.
    #[arg(long = "set", value_name = "KEY=VALUE", global = true)]
    set: Vec<String>,
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Build one similarity matrix per layer recipe.
    Build(BuildArgs),
    /// Fuse layers with SNF and the hybrid baselines.
    Fuse(FuseArgs),
    /// Louvain partitions and a modularity summary.
    Cluster(ClusterArgs),
    /// Distance correlation, partial distance correlation and Cramer's V reports.
    Compare,
    /// ARI of every method on synthetic complementary bundles.
    SynthBench(SynthArgs),
    /// Edge lists and cross-tabulations for external tools.
    Export(ExportArgs),
}

#[derive(Args)]
struct BuildArgs {
    /// Read every input as tab-separated.
    #[arg(long)]
    tsv: bool,
    /// Drop articles without references or terms instead of failing.
    #[arg(long)]
    drop_empty: bool,
    #[arg(long)]
    min_docs: Option<usize>,
    #[arg(long)]
    max_doc_fraction: Option<f64>,
}

#[derive(Args)]
struct FuseArgs {
    #[arg(long)]
    k_neighbors: Option<usize>,
    #[arg(long)]
    iterations: Option<usize>,
    #[arg(long)]
    glanzel_weight: Option<f64>,
}

#[derive(Args)]
struct ClusterArgs {
    #[arg(long, value_delimiter = ',')]
    seeds: Option<Vec<u64>>,
    #[arg(long)]
    resolution: Option<f64>,
}

#[derive(Args)]
struct SynthArgs {
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    k: Option<usize>,
    #[arg(long)]
    sigma: Option<f64>,
    #[arg(long, value_delimiter = ',')]
    seeds: Option<Vec<u64>>,
    /// Also write the first seed's bundle and truth.
    #[arg(long)]
    emit: bool,
}

#[derive(Args)]
struct ExportArgs {
    #[arg(long)]
    matrix: Option<String>,
    #[arg(long)]
    partition: Option<String>,
    #[arg(long)]
    threshold: Option<f64>,
}

fn load(cli: &Cli) -> Result<RunConfig> {
    let mut cfg = match &cli.config {
        Some(path) => RunConfig::load(path, &cli.set)?,
        None => RunConfig::from_overrides(&absolute(std::path::Path::new(".")), &cli.set)?,
    };
    if let Some(dir) = &cli.output_dir {
        cfg.output_dir = absolute(dir);
    }
    if let Some(t) = cli.threads {
        cfg.threads = Some(t);
    }
    match &cli.command {
        Cmd::Build(a) => {
            for l in &mut cfg.layers {
                l.tsv |= a.tsv;
                l.drop_empty |= a.drop_empty;
                l.min_docs = a.min_docs.unwrap_or(l.min_docs);
                l.max_doc_fraction = a.max_doc_fraction.unwrap_or(l.max_doc_fraction);
            }
        }
        Cmd::Fuse(a) => {
            cfg.snf.k_neighbors = a.k_neighbors.unwrap_or(cfg.snf.k_neighbors);
            cfg.snf.iterations = a.iterations.unwrap_or(cfg.snf.iterations);
            cfg.baselines.glanzel_weight = a.glanzel_weight.unwrap_or(cfg.baselines.glanzel_weight);
        }
        Cmd::Cluster(a) => {
            if let Some(s) = &a.seeds {
                cfg.cluster.seeds = s.clone();
            }
            cfg.cluster.resolution = a.resolution.unwrap_or(cfg.cluster.resolution);
        }
        Cmd::Compare => {}
        Cmd::SynthBench(a) => {
            cfg.synth.n = a.n.unwrap_or(cfg.synth.n);
            cfg.synth.k = a.k.unwrap_or(cfg.synth.k);
            cfg.synth.sigma = a.sigma.unwrap_or(cfg.synth.sigma);
            if let Some(s) = &a.seeds {
                cfg.synth.seeds = s.clone();
            }
            cfg.synth.emit |= a.emit;
        }
        Cmd::Export(a) => {
            if a.matrix.is_some() {
                cfg.export.matrix = a.matrix.clone();
            }
            if a.partition.is_some() {
                cfg.export.partition = a.partition.clone();
            }
            cfg.export.threshold = a.threshold.unwrap_or(cfg.export.threshold);
        }
    }
    cfg.validate()?;
    Ok(cfg)
}

fn thread_count(cfg: &RunConfig) -> Result<Option<usize>> {
    match std::env::var("MULTIFUSE_THREADS") {
        Ok(v) => Ok(Some(v.trim().parse().with_context(|| format!("MULTIFUSE_THREADS=`{v}` is not a count"))?)),
        Err(_) => Ok(cfg.threads),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn"))
        .format_timestamp(None)
        .init();
    let cli = Cli::parse();
    let cmd = match cli.command {
        Cmd::Build(_) => Command::Build,
        Cmd::Fuse(_) => Command::Fuse,
        Cmd::Cluster(_) => Command::Cluster,
        Cmd::Compare => Command::Compare,
        Cmd::SynthBench(_) => Command::SynthBench,
        Cmd::Export(_) => Command::Export,
    };
    let result = load(&cli).and_then(|cfg| {
        let mut pool = rayon::ThreadPoolBuilder::new();
        if let Some(n) = thread_count(&cfg)? {
            pool = pool.num_threads(n);
        }
        pool.build()?.install(|| run(cmd, &cfg))
    });
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
