use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use burgers2d::cli::{self, Experiment, ExperimentConfig, SnapshotFormat};
use burgers2d::Error;

const EXIT_CHECK: u8 = 1;
const EXIT_CONFIG: u8 = 2;

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (experiment, common) = match cli.command {
        Cmd::Run(c) => (Experiment::Run, c),
        Cmd::Sweep(c) => (Experiment::Sweep, c),
        Cmd::Semigroup(c) => (Experiment::Semigroup, c),
        Cmd::Selfsim(c) => (Experiment::Selfsim, c),
        Cmd::Calibrate(c) => (Experiment::Calibrate, c),
        Cmd::Validate(c) => (Experiment::Validate, c),
    };
    let config = match load(experiment, &common) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("burgers2d: {e}");
            return ExitCode::from(EXIT_CONFIG);
        }
    };
    let pool = match rayon::ThreadPoolBuilder::new().num_threads(common.jobs.unwrap_or(0)).build() {
        Ok(p) => p,
        Err(e) => {
            eprintln!("burgers2d: {e}");
            return ExitCode::from(EXIT_CONFIG);
        }
    };
    match pool.install(|| cli::execute(&config)) {
        Ok(art) => {
            for v in &art.verdicts {
                println!("{:<32} {:<5} {:e}", v.check, v.status, v.value);
            }
            println!("artifacts in {}", art.dir.display());
            if art.any_failed() {
                ExitCode::from(EXIT_CHECK)
            } else {
                ExitCode::SUCCESS
            }
        }
        Err(e @ Error::Config { .. }) => {
            eprintln!("burgers2d: {e}");
            ExitCode::from(EXIT_CONFIG)
        }
        Err(e) => {
            eprintln!("burgers2d: {e}");
            ExitCode::from(EXIT_CHECK)
        }
    }
}

fn load(experiment: Experiment, c: &CommonArgs) -> burgers2d::Result<ExperimentConfig> {
    let text = match &c.config {
        Some(p) => std::fs::read_to_string(p)?,
        None => format!("experiment = {}\n", experiment.name()),
    };
    let mut config = cli::parse_config_with_env(&text, std::env::vars())?;
    if config.experiment != experiment {
        return Err(Error::Config {
            line: 0,
            message: format!(
                "config declares experiment `{}` but the `{}` subcommand was given",
                config.experiment.name(),
                experiment.name()
            ),
        });
    }
    if let Some(out) = &c.out {
        config.output.dir = out.clone();
    }
    match c.format {
        Some(Format::Csv) => config.output.format = SnapshotFormat::Csv,
        Some(Format::Raw) => config.output.format = SnapshotFormat::Raw,
        None => {}
    }
    Ok(config)
}

#[derive(Parser)]
#[command(name = "burgers2d", version, about = "Finite-volume experiments for the anisotropic Burgers equation")]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Evolve one datum and record diagnostics.
    Run(CommonArgs),
    /// Dirac family over several concentrations.
    Sweep(CommonArgs),
    /// Contraction, comparison and mass checks on random pairs.
    Semigroup(CommonArgs),
    /// Characteristics, implicit family, shock locus and profile checks.
    Selfsim(CommonArgs),
    /// Dispersive constant over the calibration suite.
    Calibrate(CommonArgs),
    /// Convergence against the exact solutions.
    Validate(CommonArgs),
}

#[derive(clap::Args)]
struct CommonArgs {
    /// Configuration file; defaults are used when omitted.
    #[arg(long, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Output directory, overriding `[output] dir`.
    #[arg(long, value_name = "DIR")]
    out: Option<PathBuf>,
    /// Worker threads (default: all cores).
    #[arg(long, value_name = "N")]
    jobs: Option<usize>,
    /// Snapshot format, overriding `[output] format`.
    #[arg(long, value_enum)]
    format: Option<Format>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Csv,
    Raw,
}
