//! `dislab <experiment> --config <path> [--out <dir>] [--seed <u64>]`.
//! Exit status 0 when every assertion holds, 1 on an assertion failure and
//! 2 on a usage or configuration error.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{CommandFactory, Parser};
use dislocation_lab::experiments::{run, Experiment, ExperimentConfig, ExperimentError};

/// Runs one of the canonical experiments and writes CSV and .dat tables.
#[derive(Debug, Parser)]
#[command(name = "dislab", version)]
struct Cli {
    /// gb-scan, coverings-suite, foliate-demo, competitor or density-trace.
    experiment: String,
    /// JSON configuration file.
    #[arg(long)]
    config: PathBuf,
    /// Output directory; overrides `output_dir` from the configuration.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Seed; overrides `seed` from the configuration.
    #[arg(long)]
    seed: Option<u64>,
}

fn execute(cli: &Cli) -> Result<bool, ExperimentError> {
    let experiment: Experiment = cli.experiment.parse()?;
    let config = ExperimentConfig::load(&cli.config)?;
    let report = run(experiment, &config, cli.seed)?;
    let dir = cli
        .out
        .clone()
        .or_else(|| config.output_dir.clone())
        .unwrap_or_else(|| PathBuf::from("."));
    for path in report.write(&dir)? {
        println!("wrote {}", path.display());
    }
    println!("{}", report.header_line());
    for line in &report.summary {
        println!("{line}");
    }
    for failure in &report.failures {
        eprintln!("assertion failed: {}: {}", failure.name, failure.detail);
    }
    Ok(report.failures.is_empty())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            if matches!(e, ExperimentError::Usage(_)) {
                eprintln!("{}", Cli::command().render_usage());
            }
            ExitCode::from(e.exit_code())
        }
    }
}
