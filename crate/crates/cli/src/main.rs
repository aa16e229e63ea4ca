use std::path::PathBuf;
use std::process::ExitCode;

use athermal_cli::job::BetaSweep;
use athermal_cli::{execute, Command, Format, Invocation, Overrides, OUT_DIR_VAR};
use clap::Parser;

/// Free energy, distillation, cost and work of quantum channels.
///
/// Exit codes: 0 success, 1 a verification check failed, 2 invalid job or
/// arguments, 3 a numerical routine failed. Relative output paths are taken
/// relative to $ATHERMAL_OUT when it is set.
#[derive(Debug, Parser)]
#[command(name = "athermal", version)]
struct Cli {
    /// Quantity to compute.
    #[arg(value_enum)]
    command: Command,

    /// JSON job file.
    #[arg(long, value_name = "FILE")]
    job: PathBuf,

    /// Inverse temperature [default: from the job file].
    #[arg(long, conflicts_with = "beta_sweep")]
    beta: Option<f64>,

    /// Evenly spaced inverse temperatures, endpoints included [default: from the job file].
    #[arg(long, value_name = "START:STOP:STEPS")]
    beta_sweep: Option<BetaSweep>,

    /// Smoothing parameter in [0, 1) [default: job file, else 0 for distill and cost].
    #[arg(long)]
    eps: Option<f64>,

    /// Rényi order, at least 1/2; selects the Rényi divergence [default: Umegaki].
    #[arg(long)]
    alpha: Option<f64>,

    /// Seed of the optimizer restarts and of random channels [default: 42].
    #[arg(long)]
    seed: Option<u64>,

    /// Output file [default: standard output].
    #[arg(long, value_name = "PATH")]
    out: Option<PathBuf>,

    /// Output format [default: json].
    #[arg(long, value_enum)]
    format: Option<Format>,

    /// Record per-row runtimes; without it runtime_ms is 0 and output is reproducible.
    #[arg(long)]
    timing: bool,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let inv = Invocation {
        job: cli.job,
        overrides: Overrides {
            command: Some(cli.command),
            beta: cli.beta,
            beta_sweep: cli.beta_sweep,
            epsilon: cli.eps,
            alpha: cli.alpha,
            seed: cli.seed,
            out: cli.out,
            format: cli.format,
        },
        timing: cli.timing,
        out_dir: std::env::var_os(OUT_DIR_VAR),
    };
    let code = execute(&inv, &mut std::io::stdout().lock(), &mut std::io::stderr().lock());
    ExitCode::from(code as u8)
}
