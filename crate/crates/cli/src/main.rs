//! Experiment harness around the conditional-mean machinery: evaluates
//! and tabulates the mean field, cross-checks quadrature against Monte
//! Carlo, scans blowup rates, and runs the self-validation battery.

// flag guards written as !(x > 0.0) reject NaN along with the wrong sign
#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod commands;
mod config;
mod error;
mod output;

use clap::{Args, Parser, Subcommand};
use error::{CliError, CliResult};
use std::path::PathBuf;

#[derive(Parser)]
#[command(
    name = "gradstorm",
    version,
    about = "Conditional-mean velocity laboratory"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate the conditional mean at one space-time point (JSON)
    Eval(EvalArgs),
    /// Tabulate the mean over a (t, x) grid (CSV)
    Sweep(SweepArgs),
    /// Monte Carlo histogram with a quadrature comparison column (CSV)
    Mc(McArgs),
    /// Scan the slope at the origin toward the critical time (JSON)
    Blowup(BlowupArgs),
    /// Classify the blowup regime and print rate coefficients (JSON)
    Regime(RegimeArgs),
    /// Noise-to-zero convergence with transport residuals (CSV)
    Limit(LimitArgs),
    /// Solve the noiseless characteristics at a point (JSON)
    Burgers(BurgersArgs),
    /// Run the deterministic self-check battery (JSON report)
    Validate(ValidateArgs),
}

#[derive(Args)]
struct EvalArgs {
    #[arg(long)]
    t: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    x: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    sigma: Option<f64>,
    /// velocity data, e.g. linear:-1
    #[arg(long)]
    velocity: Option<String>,
    /// initial weight, e.g. uniform, gaussian:1, powerlaw:-2
    #[arg(long)]
    density: Option<String>,
    #[arg(long)]
    config: Option<PathBuf>,
    /// write here instead of stdout
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SweepArgs {
    /// start:stop:count
    #[arg(long = "t-grid", allow_hyphen_values = true)]
    t_grid: Option<String>,
    /// start:stop:count
    #[arg(long = "x-grid", allow_hyphen_values = true)]
    x_grid: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    sigma: Option<f64>,
    #[arg(long)]
    velocity: Option<String>,
    #[arg(long)]
    density: Option<String>,
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct McArgs {
    #[arg(long)]
    t: Option<f64>,
    #[arg(long = "x-min", allow_hyphen_values = true)]
    x_min: Option<f64>,
    #[arg(long = "x-max", allow_hyphen_values = true)]
    x_max: Option<f64>,
    #[arg(long)]
    samples: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    bins: Option<u32>,
    #[arg(long, allow_hyphen_values = true)]
    sigma: Option<f64>,
    #[arg(long)]
    velocity: Option<String>,
    #[arg(long)]
    density: Option<String>,
    /// truncate the initial weight to [-L, L]
    #[arg(long)]
    truncation: Option<f64>,
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct BlowupArgs {
    /// tail exponent of the powerlaw weight
    #[arg(long, allow_hyphen_values = true)]
    k: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    alpha: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    sigma: Option<f64>,
    /// first:last decades below the critical time (quarter-decade steps)
    #[arg(long = "eps-decades", allow_hyphen_values = true)]
    eps_decades: Option<String>,
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    out: Option<PathBuf>,
    /// also write the per-eps table here
    #[arg(long)]
    csv: Option<PathBuf>,
}

#[derive(Args)]
struct RegimeArgs {
    #[arg(long, allow_hyphen_values = true)]
    k: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    alpha: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    sigma: Option<f64>,
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct LimitArgs {
    #[arg(long)]
    t: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    x: Option<f64>,
    /// pow2:<hi>:<lo> or a comma-separated list
    #[arg(long = "sigma-seq", allow_hyphen_values = true)]
    sigma_seq: Option<String>,
    #[arg(long)]
    velocity: Option<String>,
    #[arg(long)]
    density: Option<String>,
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct BurgersArgs {
    #[arg(long)]
    t: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    x: Option<f64>,
    #[arg(long)]
    velocity: Option<String>,
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ValidateArgs {
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    out: Option<PathBuf>,
}

fn main() {
    std::process::exit(run());
}

fn run() -> i32 {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                print!("{e}");
                return 0;
            }
            let err = CliError::Config(e.to_string());
            eprintln!("{}", err.to_json());
            return err.exit_code();
        }
    };
    if let Err(e) = init_thread_pool() {
        eprintln!("{}", e.to_json());
        return e.exit_code();
    }
    let outcome = match cli.command {
        Command::Eval(a) => commands::eval::run(a),
        Command::Sweep(a) => commands::sweep::run(a),
        Command::Mc(a) => commands::mc::run(a),
        Command::Blowup(a) => commands::blowup::run(a),
        Command::Regime(a) => commands::regime::run(a),
        Command::Limit(a) => commands::limit::run(a),
        Command::Burgers(a) => commands::characteristics::run(a),
        Command::Validate(a) => commands::validate::run(a),
    };
    match outcome {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("{}", e.to_json());
            e.exit_code()
        }
    }
}

/// GRADSTORM_THREADS caps the worker pool; results never depend on it.
fn init_thread_pool() -> CliResult<()> {
    let Ok(raw) = std::env::var("GRADSTORM_THREADS") else {
        return Ok(());
    };
    let n: usize = raw.parse().ok().filter(|&n| n > 0).ok_or_else(|| {
        CliError::Config(format!(
            "GRADSTORM_THREADS must be a positive integer, got '{raw}'"
        ))
    })?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| CliError::Config(format!("thread pool: {e}")))
}
