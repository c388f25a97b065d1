use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use pii_order::run::{self, RunOptions};

const THREADS_ENV: &str = "PII_ORDER_THREADS";

/// Decide, couple and verify stochastic orders between two processes with
/// independent increments.
///
/// `--method auto` tries the tail and drift conditions first, then the cut
/// criterion (when a cut point is configured), then convex majorization
/// (icx and cx only), and stops at the first that holds.
///
/// Exit status: 0 satisfied / no violation, 1 violated, 2 inconclusive,
/// 3 simulate refused (check failed, no --force), 64 bad config,
/// 70 runtime error, 74 I/O error.
#[derive(Debug, Parser)]
#[command(name = "pii-order", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Experiment configuration (JSON).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory.
    #[arg(long, global = true, default_value = ".")]
    out: PathBuf,
    /// Overrides the seed in the configuration.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads (default: PII_ORDER_THREADS, then all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Simulate even when the checker does not certify the order.
    #[arg(long, global = true)]
    force: bool,
    /// Leave the timestamp line out of output headers.
    #[arg(long, global = true)]
    no_timestamp: bool,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run the order checker and write the report.
    Check,
    /// Simulate coupled paths and write them as CSV.
    Simulate,
    /// Monte-Carlo verification of the order.
    Verify,
}

fn main() -> ExitCode {
    let env_threads = std::env::var(THREADS_ENV).ok().and_then(|v| v.parse::<usize>().ok());
    let cli = Cli::parse();
    if let Some(n) = cli.threads.or(env_threads).filter(|n| *n > 0) {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("error: {e}");
            return ExitCode::from(run::EXIT_RUNTIME as u8);
        }
    }
    let Some(config) = &cli.config else {
        eprintln!("error: config: --config FILE is required");
        return ExitCode::from(run::EXIT_CONFIG as u8);
    };
    let opts = RunOptions {
        out: cli.out.clone(),
        seed: cli.seed,
        force: cli.force,
        timestamp: !cli.no_timestamp,
    };
    let result = run::load(config).and_then(|cfg| match cli.command {
        Command::Check => run::cmd_check(&cfg, &opts),
        Command::Simulate => run::cmd_simulate(&cfg, &opts),
        Command::Verify => run::cmd_verify(&cfg, &opts),
    });
    match result {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
