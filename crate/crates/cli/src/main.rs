use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};

use timebin_lab::config::{parse_config, ExperimentKind};
use timebin_lab::runner::{ensure_experiment, run};

/// Seeded batch experiments on HOM-measured time-bin photonic states.
#[derive(Parser)]
#[command(name = "timebin-lab", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// MUB-schedule maximum-likelihood tomography of qubit targets.
    Tomography(RunArgs),
    /// CHSH noncontextuality test on the hybrid polarization-time state.
    Chsh(RunArgs),
    /// HOM delay scan with simulated coincidence counts.
    HomScan(RunArgs),
    /// Quantum-walk coin-sequence synthesis of a target state.
    QwalkSynth(RunArgs),
    /// Joint anti-bunching statistics of an SPDC time-bin entangled pair.
    Entangle(RunArgs),
}

#[derive(Args)]
struct RunArgs {
    /// Path to the JSON run configuration.
    #[arg(long)]
    config: PathBuf,
    /// Overrides the config's seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Overrides the config's output path.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn execute(kind: ExperimentKind, args: RunArgs) -> Result<()> {
    let text = std::fs::read_to_string(&args.config)
        .with_context(|| format!("cannot read config {}", args.config.display()))?;
    let mut config = parse_config(&text)?;
    ensure_experiment(&config, kind)?;
    config.apply_overrides(args.seed, args.out);
    for warning in &config.warnings {
        eprintln!("warning: {warning}");
    }
    let summary = run(&config)?;
    println!(
        "{}: wrote {} ({} data rows)",
        summary.experiment,
        summary.path.display(),
        summary.data_rows
    );
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (kind, args) = match cli.command {
        Command::Tomography(args) => (ExperimentKind::Tomography, args),
        Command::Chsh(args) => (ExperimentKind::Chsh, args),
        Command::HomScan(args) => (ExperimentKind::HomScan, args),
        Command::QwalkSynth(args) => (ExperimentKind::QwalkSynth, args),
        Command::Entangle(args) => (ExperimentKind::Entangle, args),
    };
    match execute(kind, args) {
        Ok(()) => ExitCode::SUCCESS,
        Err(error) => {
            eprintln!("error: {error:#}");
            ExitCode::FAILURE
        }
    }
}
