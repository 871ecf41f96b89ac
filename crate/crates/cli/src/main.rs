use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Result;
use clap::{Args, Parser, Subcommand};
use qhul_cli::{ExperimentRegistry, RunContext};
use qhul_core::io::csv::fmt_f64;
use qhul_core::predict_phase_variance;

/// Simulate phase-shifting holography with undetected photons under classical noise.
///
/// Exit status: 0 on success, 1 on any configuration, validation or I/O
/// error, 2 on a command-line usage error.
#[derive(Parser)]
#[command(name = "qhul", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Sample noise-only frames; write per-pixel and pooled mean and variance
    CharacterizeNoise(RunArgs),
    /// Reconstruct the scene at every noise-to-signal ratio in [sweep] ratios
    ResilienceSweep(RunArgs),
    /// Phase variance versus noise variance with a log-log fit per series
    VarianceSweep(RunArgs),
    /// Print the predicted single-pixel phase variance
    Predict(PredictArgs),
    /// Count mean and spread of one pixel across the phase steps
    SignalTrace(RunArgs),
}

#[derive(Args)]
struct RunArgs {
    /// Experiment config file
    #[arg(short, long, value_name = "FILE")]
    config: PathBuf,
    /// Override the config seed
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory; defaults to `output_dir` from the config, relative to the config file
    #[arg(short, long, value_name = "DIR")]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct PredictArgs {
    /// Mean signal counts per pixel and frame for a single arm
    #[arg(long)]
    s0: f64,
    /// Fringe visibility in (0, 1]
    #[arg(long)]
    visibility: f64,
    /// Number of phase steps (>= 3)
    #[arg(long)]
    steps: usize,
    /// Number of repeated acquisitions averaged
    #[arg(long, default_value_t = 1)]
    repeats: usize,
    /// Per-frame noise count variance
    #[arg(long, default_value_t = 0.0)]
    noise_var: f64,
}

fn run(cli: Cli) -> Result<()> {
    let (name, args) = match cli.command {
        Command::Predict(p) => {
            let v = predict_phase_variance(p.s0, p.visibility, p.steps, p.repeats, p.noise_var)?;
            println!("{}", fmt_f64(v));
            return Ok(());
        }
        Command::CharacterizeNoise(a) => ("characterize-noise", a),
        Command::ResilienceSweep(a) => ("resilience-sweep", a),
        Command::VarianceSweep(a) => ("variance-sweep", a),
        Command::SignalTrace(a) => ("signal-trace", a),
    };
    let ctx = RunContext::from_file(name, &args.config, args.seed, args.out)?;
    let output = ExperimentRegistry::builtin().run(name, &ctx)?;
    eprintln!(
        "{}: wrote {} files to {}",
        name,
        output.files.len(),
        ctx.out_dir.display()
    );
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
