//! `feedaudit`: simulate, measure, validate and bias-audit FIFO news feeds.
//!
//! Exit codes: 0 success, 1 validation or domain error (including bad flags),
//! 2 I/O error.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use feedaudit::bias::{bias_report, validation_scatter, BootstrapConfig};
use feedaudit::ingest::{self, read_catalog, read_snapshots, write_report};
use feedaudit::metrics::{exposure_table, occupancy_curves};
use feedaudit::sim::SimConfig;
use feedaudit::{Error, DEFAULT_K};

#[derive(Debug, Parser)]
#[command(
    name = "feedaudit",
    version,
    about = "Model, simulate, measure and bias-audit FIFO news feeds"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Generate a synthetic dataset: snapshots, catalog, truth rates and manifest.
    Simulate(SimulateArgs),
    /// Measured effective rate, occupancy and visibility per bot and publisher.
    Metrics(MeasureArgs),
    /// Measured against model-predicted occupancy per bot and publisher.
    Validate(MeasureArgs),
    /// Bias against the unfiltered baseline with bootstrap confidence intervals.
    Bias(BiasArgs),
    /// Normalized occupancy versus feed size K = 1..K_max.
    Curve(CurveArgs),
}

#[derive(Debug, Args)]
struct SimulateArgs {
    /// Simulation configuration (JSON).
    #[arg(long)]
    config: PathBuf,
    /// Seed for the random stream; overrides the seed in the config file.
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory, created if missing.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Args)]
struct MeasureArgs {
    /// Snapshot dataset (JSON lines).
    #[arg(long)]
    snapshots: PathBuf,
    /// Feed size K: number of top positions considered.
    #[arg(long, default_value_t = DEFAULT_K)]
    k: u32,
    /// Output report (CSV).
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Args)]
struct BiasArgs {
    /// Snapshot dataset (JSON lines).
    #[arg(long)]
    snapshots: PathBuf,
    /// Catalog of all published posts (JSON lines).
    #[arg(long)]
    catalog: PathBuf,
    /// Feed size K.
    #[arg(long, default_value_t = DEFAULT_K)]
    k: u32,
    /// Bootstrap replicates.
    #[arg(long, default_value_t = 1000)]
    replicates: u32,
    /// Confidence level of the percentile interval, in (0, 1).
    #[arg(long, default_value_t = 0.95)]
    level: f64,
    /// Seed for the bootstrap resampling.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output report (CSV).
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Args)]
struct CurveArgs {
    /// Snapshot dataset (JSON lines).
    #[arg(long)]
    snapshots: PathBuf,
    /// Largest feed size in the curve.
    #[arg(long = "k-max")]
    k_max: u32,
    /// Output report (CSV).
    #[arg(long)]
    out: PathBuf,
}

fn check_k(k: u32) -> Result<(), Error> {
    if k < 1 {
        Err(Error::Domain("K must be ≥ 1".into()))
    } else {
        Ok(())
    }
}

fn load_config(path: &Path) -> Result<SimConfig, Error> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    serde_json::from_str(&text).map_err(|e| Error::Invalid {
        path: path.display().to_string(),
        line: e.line(),
        field: "config".into(),
        message: e.to_string(),
    })
}

fn run(command: Command) -> Result<(), Error> {
    match command {
        Command::Simulate(args) => {
            let mut config = load_config(&args.config)?;
            if let Some(seed) = args.seed {
                config.seed = seed;
            }
            let manifest = ingest::generate_synthetic(&config, &args.out)?;
            let snapshots: u64 = manifest.counts.snapshots_per_bot.values().sum();
            eprintln!(
                "wrote {} snapshots and {} posts to {}",
                snapshots,
                manifest.counts.catalog_size,
                args.out.display()
            );
        }
        Command::Metrics(args) => {
            check_k(args.k)?;
            let set = read_snapshots(&args.snapshots)?;
            write_report(&exposure_table(&set, args.k)?, &args.out)?;
        }
        Command::Validate(args) => {
            check_k(args.k)?;
            let set = read_snapshots(&args.snapshots)?;
            let scatter = validation_scatter(&set, args.k)?;
            write_report(&scatter, &args.out)?;
            println!(
                "points={} max_abs_deviation={} mean_abs_deviation={}",
                scatter.rows.len(),
                ingest::format_decimal(scatter.max_abs_deviation()),
                ingest::format_decimal(scatter.mean_abs_deviation())
            );
        }
        Command::Bias(args) => {
            check_k(args.k)?;
            let config = BootstrapConfig {
                replicates: args.replicates,
                level: args.level,
                seed: args.seed,
            };
            config.validate()?;
            let set = read_snapshots(&args.snapshots)?;
            let catalog = read_catalog(&args.catalog)?;
            let report = bias_report(&set, &catalog, args.k, &config)?;
            for row in report.rows.iter().filter(|r| !r.in_catalog) {
                eprintln!(
                    "warning: publisher '{}' appears at bot '{}' but not in the catalog; unfiltered occupancy set to 0",
                    row.publisher_id, row.bot_id
                );
            }
            write_report(&report, &args.out)?;
        }
        Command::Curve(args) => {
            if args.k_max < 1 {
                return Err(Error::Domain("K_max must be ≥ 1".into()));
            }
            let set = read_snapshots(&args.snapshots)?;
            write_report(&occupancy_curves(&set, args.k_max)?, &args.out)?;
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_io() { 2 } else { 1 })
        }
    }
}
