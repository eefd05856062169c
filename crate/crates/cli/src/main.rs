//! Command-line front end for the Monte Carlo harness.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use jadd::harness::{run_convergence_trace, run_experiment, ExperimentSpec};

/// Run a detection experiment described by a key=value config file.
#[derive(Debug, Parser)]
#[command(name = "simulate", version)]
struct Args {
    /// Experiment config file.
    #[arg(long)]
    config: PathBuf,
    /// Summary CSV, one row per (detector, SNR, delta).
    #[arg(long)]
    out: PathBuf,
    /// Per-iteration residual and Lagrangian trace of one solve.
    #[arg(long)]
    trace: Option<PathBuf>,
    /// Overrides system.seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Overrides experiment.threads.
    #[arg(long)]
    threads: Option<usize>,
    /// Per-slot log the summary can be recomputed from.
    #[arg(long)]
    slot_log: Option<PathBuf>,
}

fn run(args: Args) -> jadd::Result<usize> {
    let mut spec = ExperimentSpec::from_file(&args.config)?;
    spec.output_path = Some(args.out);
    if let Some(seed) = args.seed {
        spec.system.seed = seed;
    }
    if args.threads.is_some() {
        spec.threads = args.threads;
    }
    if args.trace.is_some() {
        spec.trace_path = args.trace;
    }
    if args.slot_log.is_some() {
        spec.slot_log_path = args.slot_log;
    }
    spec.validate()?;
    if spec.trace_path.is_some() {
        run_convergence_trace(&spec)?;
    }
    let result = run_experiment(&spec)?;
    for row in result.rows.iter().filter(|r| r.failures > 0) {
        eprintln!(
            "{} snr={} delta={}: {} of {} slots failed",
            row.detector, row.snr_db, row.delta, row.failures, row.slots
        );
    }
    Ok(result.total_failures())
}

fn main() -> ExitCode {
    match run(Args::parse()) {
        Ok(0) => ExitCode::SUCCESS,
        Ok(n) => {
            eprintln!("{n} slot detections failed");
            ExitCode::from(2)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
