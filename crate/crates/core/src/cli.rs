//! Command-line front end for the experiments.

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use crate::error::{Error, Result};
use crate::experiments::{self, ExperimentConfig, ExperimentKind, Report};

pub const EXIT_CONFIG: i32 = 64;
pub const THREADS_ENV: &str = "TWISTQFT_THREADS";

#[derive(Debug, Parser)]
#[command(name = "twistqft", version, about = "Twist-deformed free-field experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Commutator of oppositely deformed fields localized in opposite wedges.
    WedgeLocality(RunArgs),
    /// Decay of the deformed commutator at growing spacelike separation.
    DecayScan(RunArgs),
    /// Connected four-point defect against separation, deformed and not.
    ClusterScan(RunArgs),
    /// Star-product identities on small grids.
    StarChecks(RunArgs),
    /// Wedge, cone and Lorentz-group checks.
    SpaceChecks(RunArgs),
}

#[derive(Debug, Args)]
struct RunArgs {
    /// JSON experiment configuration.
    #[arg(long)]
    config: PathBuf,
    /// Output directory for report.json and tables.
    #[arg(long, default_value = ".")]
    out: PathBuf,
    /// Multiplies the quadrature resolution.
    #[arg(long)]
    resolution_scale: Option<f64>,
    /// Worker threads; falls back to TWISTQFT_THREADS.
    #[arg(long)]
    threads: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
}

impl Command {
    fn parts(&self) -> (ExperimentKind, &RunArgs) {
        match self {
            Command::WedgeLocality(a) => (ExperimentKind::WedgeLocality, a),
            Command::DecayScan(a) => (ExperimentKind::DecayScan, a),
            Command::ClusterScan(a) => (ExperimentKind::ClusterScan, a),
            Command::StarChecks(a) => (ExperimentKind::StarChecks, a),
            Command::SpaceChecks(a) => (ExperimentKind::SpaceChecks, a),
        }
    }
}

fn thread_count(flag: Option<usize>) -> Result<Option<usize>> {
    if let Some(n) = flag {
        return Ok(Some(n));
    }
    match std::env::var(THREADS_ENV) {
        Ok(s) => s.trim().parse().map(Some).map_err(|_| Error::Config(format!("{THREADS_ENV}={s} is not a thread count"))),
        Err(_) => Ok(None),
    }
}

fn execute(kind: ExperimentKind, args: &RunArgs) -> Result<Report> {
    let cfg = ExperimentConfig::load(&args.config)?.with_overrides(args.resolution_scale, args.seed);
    if cfg.experiment != kind {
        return Err(Error::Config(format!(
            "config is for `{}`, not `{}`",
            cfg.experiment.subcommand(),
            kind.subcommand()
        )));
    }
    if args.resolution_scale.is_some_and(|s| !(s > 0.0)) {
        return Err(Error::Config("--resolution-scale must be positive".into()));
    }
    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(n) = thread_count(args.threads)? {
        if n == 0 {
            return Err(Error::Config("thread count must be positive".into()));
        }
        pool = pool.num_threads(n);
    }
    let pool = pool.build().map_err(|e| Error::Config(e.to_string()))?;
    let report = pool.install(|| experiments::run(&cfg))?;
    report.write(&args.out)?;
    Ok(report)
}

/// Runs one subcommand and returns the process exit code.
pub fn cli_main<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_CONFIG } else { 0 };
        }
    };
    let (kind, args) = cli.command.parts();
    match execute(kind, args) {
        Ok(report) => {
            for c in &report.checks {
                println!("{:<28} {:?} {}", c.name, c.status, c.detail);
            }
            println!("{}: {:?}", kind.subcommand(), report.status);
            report.status.exit_code()
        }
        Err(e @ (Error::Config(_) | Error::Json(_))) => {
            eprintln!("twistqft: {e}");
            EXIT_CONFIG
        }
        Err(e) => {
            eprintln!("twistqft: {e}");
            1
        }
    }
}
