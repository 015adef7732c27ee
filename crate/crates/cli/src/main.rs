//! Command line front end: runs experiments from key=value config files,
//! exports synthetic dynamic graphs, and sanity-checks dataset ingestion.

use clap::{Args, Parser, Subcommand};
use reidsim::error::{Result, SimError};
use reidsim::harness::config::{load_config, ExperimentConfig};
use reidsim::harness::game::{run_experiment, RunReport};
use reidsim::harness::report::write_outputs;
use reidsim::ingest::{
    load_edge_list_path, periodic_cuts, take_snapshots, write_dynamic_graph, EdgeListFormat,
};
use reidsim::synth::{generate, SynthConfig};
use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(
    name = "reidsim",
    about = "Simulates active re-identification attacks on periodically published social graphs",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Runs a multi-trial experiment and writes results.csv, timings.csv
    /// and config.resolved.txt to the output directory.
    Run(RunArgs),
    /// Generates a synthetic dynamic graph and writes it as a temporal
    /// edge list (timestamps are release numbers).
    SynthExport(SynthExportArgs),
    /// Loads a temporal edge list, cuts snapshots and prints per-snapshot
    /// counts without running any attack.
    Ingest(IngestArgs),
    /// Writes the bundled deterministic sample dataset (a pet-community
    /// style friendship network in konect format).
    SampleData(SampleDataArgs),
}

#[derive(Args)]
struct SampleDataArgs {
    /// Destination file for the edge list.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct RunArgs {
    /// Key=value config file; defaults apply for missing keys.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Overrides the trial count from the config.
    #[arg(long)]
    trials: Option<u32>,
    /// Overrides the master seed from the config.
    #[arg(long)]
    seed: Option<u64>,
    /// Overrides the defender's noise ratio from the config.
    #[arg(long)]
    noise_ratio: Option<f64>,
    /// Disables the temporal consistency gates (ablation mode).
    #[arg(long)]
    no_temporal: bool,
    /// Overrides how many past releases each new release re-examines.
    #[arg(long)]
    refine_depth: Option<u32>,
    /// Output directory (default: the config's `out`, else ./out).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SynthExportArgs {
    /// Size of the seed clique.
    #[arg(long, default_value_t = 30)]
    n0: usize,
    /// Edges attached to every vertex added after the seed clique.
    #[arg(long, default_value_t = 5)]
    edges_per_vertex: usize,
    /// Vertex count at which the first snapshot is taken.
    #[arg(long, default_value_t = 200)]
    initial_vertices: usize,
    /// New-edge fraction that triggers each later snapshot.
    #[arg(long, default_value_t = 0.05)]
    growth_ratio: f64,
    /// Number of snapshots to produce.
    #[arg(long, default_value_t = 10)]
    snapshots: usize,
    #[arg(long, default_value_t = 42)]
    seed: u64,
    /// Output file (default: stdout).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct IngestArgs {
    /// Path to the edge-list file.
    #[arg(long)]
    dataset: PathBuf,
    /// plain or konect.
    #[arg(long, default_value = "konect", value_parser = parse_format)]
    format: EdgeListFormat,
    /// Comma-separated cut timestamps, strictly increasing.
    #[arg(long, value_delimiter = ',', conflicts_with = "cut_every")]
    cuts: Option<Vec<i64>>,
    /// Cut period; the grid starts one period after the earliest timestamp
    /// (or after --cut-start) and ends at the first cut covering the latest.
    #[arg(long, required_unless_present = "cuts")]
    cut_every: Option<i64>,
    /// First grid anchor for --cut-every.
    #[arg(long, requires = "cut_every")]
    cut_start: Option<i64>,
    /// Also admit vertices that have a join record but no edges yet.
    #[arg(long)]
    include_isolated: bool,
    /// Re-export the cut snapshots as a canonical temporal edge list.
    #[arg(long)]
    export: Option<PathBuf>,
}

fn parse_format(s: &str) -> std::result::Result<EdgeListFormat, String> {
    s.parse().map_err(|e: SimError| e.to_string())
}

fn cmd_run(args: RunArgs) -> Result<()> {
    let mut cfg = match &args.config {
        Some(path) => load_config(path)?,
        None => ExperimentConfig::default(),
    };
    if let Some(t) = args.trials {
        cfg.trials = t;
    }
    if let Some(s) = args.seed {
        cfg.master_seed = s;
    }
    if let Some(r) = args.noise_ratio {
        cfg.noise_ratio = r;
    }
    if args.no_temporal {
        cfg.temporal = false;
    }
    if let Some(d) = args.refine_depth {
        cfg.refine_depth = d;
    }
    if let Some(out) = args.out {
        cfg.out_dir = Some(out);
    }
    let out_dir = cfg.out_dir.clone().unwrap_or_else(|| PathBuf::from("out"));
    cfg.out_dir = Some(out_dir.clone());

    let report = run_experiment(&cfg)?;
    write_outputs(&report, &out_dir)?;
    print_run_summary(&report);
    println!("outputs written to {}", out_dir.display());
    Ok(())
}

fn print_run_summary(report: &RunReport) {
    let failed = report.trials.len() - report.successful_trials();
    println!(
        "{} trial(s) finished, {} failed",
        report.successful_trials(),
        failed
    );
    for (trial, msg) in report.failures() {
        println!("  trial {} failed: {}", trial, msg);
    }
    println!(
        "{:>8} {:>10} {:>10} {:>12} {:>12}",
        "snapshot", "success", "refined", "candidates", "attack_secs"
    );
    for (&snap, agg) in &report.aggregates {
        println!(
            "{:>8} {:>10.4} {:>10.4} {:>12.1} {:>12.3}",
            snap,
            agg.success.mean,
            agg.success_refined.mean,
            agg.candidates.mean,
            agg.retrieval_secs.mean + agg.matching_secs.mean
        );
    }
}

fn cmd_synth_export(args: SynthExportArgs) -> Result<()> {
    let cfg = SynthConfig {
        n0: args.n0,
        me: args.edges_per_vertex,
        nv: args.initial_vertices,
        r_delta: args.growth_ratio,
        snapshots: args.snapshots,
        seed: args.seed,
    };
    let dg = generate(&cfg)?;
    match &args.out {
        Some(path) => write_dynamic_graph(std::fs::File::create(path)?, &dg)?,
        None => {
            let stdout = std::io::stdout();
            write_dynamic_graph(stdout.lock(), &dg)?;
        }
    }
    Ok(())
}

fn cmd_sample_data(args: SampleDataArgs) -> Result<()> {
    reidsim::datasets::write_sample_community(&args.out)?;
    println!(
        "wrote sample dataset ({} vertices, {} edges) to {}",
        reidsim::datasets::SAMPLE_COMMUNITY_VERTICES,
        reidsim::datasets::SAMPLE_COMMUNITY_EDGES,
        args.out.display()
    );
    Ok(())
}

fn cmd_ingest(args: IngestArgs) -> Result<()> {
    let tel = load_edge_list_path(&args.dataset, args.format)?;
    println!(
        "{}: {} edge record(s), {} vertex id(s), {} self-loop(s) dropped",
        args.dataset.display(),
        tel.records.len(),
        tel.external_ids().len(),
        tel.self_loops_rejected
    );
    let cuts = match (&args.cuts, args.cut_every) {
        (Some(ts), None) => ts.clone(),
        (None, Some(step)) => {
            let (lo, hi) = tel
                .time_span()
                .ok_or_else(|| SimError::Config("dataset has no timestamps to cut".into()))?;
            periodic_cuts(args.cut_start.unwrap_or(lo), hi, step)?
        }
        _ => return Err(SimError::Config("give either --cuts or --cut-every".into())),
    };
    if let Some((lo, hi)) = tel.time_span() {
        println!("time span [{}, {}], {} cut(s)", lo, hi, cuts.len());
    }
    let dg = take_snapshots(&tel, &cuts, args.include_isolated)?;
    println!("{:>8} {:>12} {:>10} {:>10}", "snapshot", "cut", "vertices", "edges");
    for (i, g) in dg.snapshots.iter().enumerate() {
        println!(
            "{:>8} {:>12} {:>10} {:>10}",
            i + 1,
            cuts[i],
            g.vertex_count(),
            g.edge_count()
        );
    }
    if let Some(path) = &args.export {
        write_dynamic_graph(std::fs::File::create(path)?, &dg)?;
        println!("canonical edge list written to {}", path.display());
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn"))
        .format_timestamp(None)
        .init();
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Run(args) => cmd_run(args),
        Command::SynthExport(args) => cmd_synth_export(args),
        Command::Ingest(args) => cmd_ingest(args),
        Command::SampleData(args) => cmd_sample_data(args),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let mut stderr = std::io::stderr();
            let _ = writeln!(stderr, "error: {}", e);
            ExitCode::FAILURE
        }
    }
}
