//! Command-line front end: runs simulation campaigns described by TOML
//! manifests and writes CDF/summary/power artifacts.

use clap::{Args, Parser, Subcommand};
use hbfsim::harness::{self, run_campaign, CampaignConfig, Scheme};
use hbfsim::report::{emit_report, ReportFormat};
use std::path::PathBuf;
use std::str::FromStr;

#[derive(Parser)]
#[command(
    name = "hbfsim",
    version,
    about = "Monte Carlo link-level simulator for multi-cell mmWave hybrid beamforming",
    propagate_version = true
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a campaign and emit CDF, summary, and power artifacts.
    Simulate(SimulateArgs),
    /// Estimate the sector radius that meets a cell-edge SNR target.
    CoverageRadius(CoverageArgs),
}

#[derive(Args)]
struct SimulateArgs {
    /// Campaign manifest (TOML). Flags below override its fields.
    #[arg(long)]
    config: PathBuf,
    /// Comma-separated scheme list: baseline,lsp,slnr,gmr.
    #[arg(long, value_delimiter = ',')]
    schemes: Option<Vec<String>>,
    /// Sector radius in meters.
    #[arg(long)]
    radius: Option<f64>,
    /// Users per sector.
    #[arg(long)]
    users: Option<usize>,
    /// Spatial streams per user.
    #[arg(long)]
    streams: Option<usize>,
    /// Monte Carlo realizations.
    #[arg(long)]
    realizations: Option<usize>,
    /// Campaign seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory for the artifacts.
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// Table format: csv or json (the summary is always JSON).
    #[arg(long, default_value = "csv")]
    format: String,
    /// Also write every channel matrix as JSON lines to this path.
    /// Intended for small runs; the file grows with every realization.
    #[arg(long)]
    dump_channels: Option<PathBuf>,
}

#[derive(Args)]
struct CoverageArgs {
    /// Campaign manifest (TOML) supplying budget, arrays, and profile.
    #[arg(long)]
    config: PathBuf,
    /// Cell-edge SNR target in dB.
    #[arg(long, default_value_t = 5.0)]
    target_snr_db: f64,
    /// Percentile defining the cell edge (5 means 95% coverage).
    #[arg(long, default_value_t = 5.0)]
    edge_percentile: f64,
    /// Path-loss samples per radius probe.
    #[arg(long, default_value_t = 4000)]
    samples: usize,
}

fn main() {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Simulate(args) => simulate(args),
        Command::CoverageRadius(args) => coverage(args),
    };
    if let Err(e) = outcome {
        eprintln!("error: {e}");
        std::process::exit(e.exit_code());
    }
}

fn simulate(args: SimulateArgs) -> hbfsim::Result<()> {
    let mut cfg = CampaignConfig::from_path(&args.config)?;
    if let Some(schemes) = args.schemes {
        cfg.schemes = schemes
            .iter()
            .map(|s| Scheme::from_str(s))
            .collect::<hbfsim::Result<_>>()?;
    }
    if let Some(radius) = args.radius {
        cfg.cell_radius_m = radius;
    }
    if let Some(users) = args.users {
        cfg.users_per_cell = users;
    }
    if let Some(streams) = args.streams {
        cfg.streams_per_user = streams;
    }
    if let Some(realizations) = args.realizations {
        cfg.realizations = realizations;
    }
    if let Some(seed) = args.seed {
        cfg.seed = seed;
    }
    let format = ReportFormat::from_str(&args.format)?;

    let outcome = run_campaign(&cfg)?;
    let written = emit_report(&outcome.results, format, &args.out)?;

    println!(
        "campaign done: {} realizations, {} channel matrices, {} records",
        cfg.realizations,
        outcome.channel_count,
        outcome.results.len()
    );
    for &scheme in &cfg.schemes {
        let values = outcome.scheme_values(scheme);
        let series = harness::cdf(&values)?;
        println!(
            "  {scheme:<8} median {:.3} bit/s/Hz  p10 {:.3}  p90 {:.3}",
            series.percentile(50.0),
            series.percentile(10.0),
            series.percentile(90.0)
        );
    }
    for path in &written {
        println!("wrote {}", path.display());
    }
    if let Some(dump) = args.dump_channels {
        harness::dump_channels(&cfg, &dump)?;
        println!("wrote {}", dump.display());
    }
    Ok(())
}

fn coverage(args: CoverageArgs) -> hbfsim::Result<()> {
    let cfg = CampaignConfig::from_path(&args.config)?;
    let radius =
        harness::coverage_radius(&cfg, args.target_snr_db, args.edge_percentile, args.samples)?;
    println!(
        "estimated radius for {} dB at the {}% edge: {:.1} m",
        args.target_snr_db, args.edge_percentile, radius
    );
    Ok(())
}
