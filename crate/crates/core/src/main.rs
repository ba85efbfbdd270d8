use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;

use torbit::cli::{load_config, run};
use torbit::Error;

/// Batch runner for torus-orbit stratification, closure prediction, unit
/// classification and decomposable-form scans over exact number-field
/// arithmetic.
#[derive(Parser)]
#[command(name = "torbit", version)]
struct Args {
    /// Job configuration (JSON).
    #[arg(long)]
    config: PathBuf,
    /// Output directory for report.json and optional strata.dot, scan.csv.
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// Override the field precision in bits.
    #[arg(long)]
    precision: Option<u32>,
    /// Override the enumeration height.
    #[arg(long)]
    height: Option<i64>,
    /// Override the worker count (0 = automatic).
    #[arg(long)]
    workers: Option<usize>,
    /// Override the random seed.
    #[arg(long)]
    seed: Option<u64>,
}

fn main() -> ExitCode {
    let args = Args::parse();
    let mut cfg = match load_config(&args.config) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {}", e);
            return ExitCode::from(1);
        }
    };
    if let Some(p) = args.precision {
        cfg.budgets.precision = p;
    }
    if let Some(h) = args.height {
        cfg.budgets.height = h;
    }
    if let Some(w) = args.workers {
        cfg.budgets.workers = w;
    }
    if let Some(s) = args.seed {
        cfg.seed = s;
    }
    match run(&cfg) {
        Ok(artifacts) => {
            if let Err(e) = artifacts.write(&args.out) {
                eprintln!("error: {}", e);
                return ExitCode::from(1);
            }
            println!("report written to {}", args.out.join("report.json").display());
            ExitCode::SUCCESS
        }
        Err(e @ Error::TheoremViolation(_)) => {
            // Reserved: an impossible condition fired. Never absorbed.
            eprintln!("ALARM: {}", e);
            ExitCode::from(2)
        }
        Err(e) => {
            eprintln!("error: {}", e);
            ExitCode::from(1)
        }
    }
}
