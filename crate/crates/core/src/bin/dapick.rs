use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use dapick::experiment::{self, ExperimentConfig, RunError};

/// Thread count for the parallel matrix assembly.
const THREADS_ENV: &str = "DAPICK_THREADS";

#[derive(Parser)]
#[command(
    name = "dapick",
    version,
    about = "Pick multiplier norms and transversal holomap experiments"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Minimal multiplier norm of interpolation data.
    PickNorm(RunArgs),
    /// Properness, transversality and boundary injectivity of a holomap.
    HolomapCheck(RunArgs),
    /// Spectrum of the discretised R operator against the multi-index oracle.
    OperatorR(RunArgs),
    /// Extension norms on nested samples of a holomap image.
    ExtensionProbe(RunArgs),
    /// Combination bound on strongly disjoint samples.
    DisjointUnion(RunArgs),
}

#[derive(Args)]
struct RunArgs {
    #[arg(long)]
    config: PathBuf,
    #[arg(long)]
    out: PathBuf,
    #[arg(long)]
    seed: Option<u64>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (kind, args) = match &cli.command {
        Command::PickNorm(a) => ("pick-norm", a),
        Command::HolomapCheck(a) => ("holomap-check", a),
        Command::OperatorR(a) => ("operator-r", a),
        Command::ExtensionProbe(a) => ("extension-probe", a),
        Command::DisjointUnion(a) => ("disjoint-union", a),
    };

    if let Ok(v) = std::env::var(THREADS_ENV) {
        match v.parse::<usize>() {
            Ok(n) => {
                let _ = rayon::ThreadPoolBuilder::new()
                    .num_threads(n)
                    .build_global();
            }
            Err(_) => {
                eprintln!("ignoring {THREADS_ENV}={v}: not a number");
            }
        }
    }

    match run(kind, args) {
        Ok(report) => {
            for a in &report.assertions {
                let status = if a.passed { "PASS" } else { "FAIL" };
                eprintln!(
                    "{status} {} observed={:e} {:?} target={:e} tol={:e}",
                    a.name, a.observed, a.relation, a.target, a.tolerance
                );
            }
            ExitCode::from(report.exit_code() as u8)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn run(kind: &str, args: &RunArgs) -> Result<experiment::ExperimentReport, RunError> {
    let text = std::fs::read_to_string(&args.config).map_err(|e| {
        experiment::ConfigError(format!("cannot read {}: {e}", args.config.display()))
    })?;
    let config = ExperimentConfig::from_json(&text)?;
    if config.experiment.kind() != kind {
        return Err(experiment::ConfigError(format!(
            "config is a {} experiment, subcommand is {kind}",
            config.experiment.kind()
        ))
        .into());
    }
    experiment::run(&config, &args.out, args.seed)
}
