use clap::{Parser, Subcommand};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use tubelab::lab::TheoremTag;
use tubelab_cli::config::{parse_config_with, ExperimentKind, Overrides};
use tubelab_cli::manifest::RunManifest;
use tubelab_cli::plots::{emit_plots, reports_in};
use tubelab_cli::run::{run_experiment, RunOptions};
use tubelab_cli::CliError;

/// Coulomb operators on thin tubes and their one-dimensional limits.
#[derive(Parser)]
#[command(name = "tubelab", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// TOML experiment description; defaults apply to anything left out.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Parent directory of run directories; for `report`, the run directory.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads for rung fan-out.
    #[arg(long, global = true)]
    jobs: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// Transverse Dirichlet modes and C(S) of the cross-section.
    Modes,
    /// Levels of the one-dimensional Dirichlet operator.
    #[command(name = "spectrum-1d")]
    Spectrum1d,
    /// Boundary data at the origin and extension membership.
    BoundaryData,
    /// Tube resolvent solves along the ladder.
    TubeSolve,
    /// Convergence sweep along the ladder.
    Converge {
        #[arg(long, value_parser = parse_theorem)]
        theorem: Option<TheoremTag>,
    },
    /// Sampled Klaus conditions of the averaged potential.
    Klaus,
    /// Q^eps scenarios.
    Qeps,
    /// Trial-function form limits.
    Gamma,
    /// Verify a finished run and re-emit its plot scripts.
    Report,
}

fn parse_theorem(s: &str) -> Result<TheoremTag, String> {
    match TheoremTag::parse(s) {
        Some(t @ (TheoremTag::T1 | TheoremTag::T2 | TheoremTag::P1 | TheoremTag::P2 | TheoremTag::P3)) => Ok(t),
        _ => Err(format!("expected one of T1, T2, P1, P2, P3, got {s}")),
    }
}

fn report(dir: &Path) -> Result<u8, CliError> {
    let manifest = RunManifest::load(dir)?;
    let bad = manifest.verify(dir);
    if !bad.is_empty() {
        return Err(CliError::Tampered(bad));
    }
    for script in emit_plots(&reports_in(dir))? {
        println!("plot script {}", script.display());
    }
    println!(
        "{} {} pass={} errors={}",
        manifest.experiment, manifest.experiment_id, manifest.pass, manifest.errors.len()
    );
    Ok(manifest.exit_code())
}

fn run(cli: Cli) -> Result<u8, CliError> {
    let (kind, theorem) = match cli.command {
        Command::Report => {
            let dir = cli.out.unwrap_or_else(|| PathBuf::from("."));
            return report(&dir);
        }
        Command::Modes => (ExperimentKind::Modes, None),
        Command::Spectrum1d => (ExperimentKind::Spectrum1d, None),
        Command::BoundaryData => (ExperimentKind::BoundaryData, None),
        Command::TubeSolve => (ExperimentKind::TubeSolve, None),
        Command::Converge { theorem } => (ExperimentKind::Converge, theorem),
        Command::Klaus => (ExperimentKind::Klaus, None),
        Command::Qeps => (ExperimentKind::Qeps, None),
        Command::Gamma => (ExperimentKind::Gamma, None),
    };
    let text = match &cli.config {
        Some(p) => std::fs::read_to_string(p).map_err(|source| CliError::Io { path: p.clone(), source })?,
        None => String::new(),
    };
    let overrides = Overrides {
        experiment: Some(kind),
        theorem,
        seed: cli.seed,
        output_directory: cli.out,
    };
    let config = parse_config_with(&text, &overrides)?;
    let outcome = run_experiment(&config, &RunOptions { jobs: cli.jobs })?;
    let m = &outcome.manifest;
    println!("run {}", outcome.dir.display());
    for e in &m.errors {
        eprintln!("error: {e}");
    }
    println!("{} {} pass={}", m.experiment, m.experiment_id, m.pass);
    Ok(m.exit_code())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("{e}");
            ExitCode::from(2)
        }
    }
}
