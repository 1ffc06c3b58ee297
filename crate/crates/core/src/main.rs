//! Command-line front end for the experiment runner.
//!
//! Exit codes: 0 success, 1 configuration/input error, 2 invariant
//! violation detected while running.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use wsobolev::config::{ExperimentConfig, MeasureSpec};
use wsobolev::error::Error;
use wsobolev::experiment::{self, RunOutcome, PRESETS};

#[derive(Parser)]
#[command(name = "wsobolev", version, about = "Energy functionals, bundle assignments, and closability probes for structured measures")]
struct Cli {
    #[command(subcommand)]
    command: Option<Cmd>,

    /// Run a built-in preset instead of a config file.
    #[arg(long, global = true, value_name = "NAME")]
    preset: Option<String>,

    /// Output directory for results.csv and report.json.
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,

    /// Override the configured random seed.
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Multiply all resolution parameters by this factor.
    #[arg(long, global = true, value_name = "FACTOR")]
    resolution_scale: Option<f64>,

    /// List catalog measures and presets, then exit.
    #[arg(long)]
    list_catalog: bool,
}

#[derive(Subcommand)]
enum Cmd {
    /// Run an experiment from a JSON configuration file.
    Run {
        /// Path to the configuration JSON.
        config: PathBuf,
    },
}

fn error_exit_code(e: &Error) -> u8 {
    match e {
        Error::Config(_)
        | Error::Json(_)
        | Error::Io(_)
        | Error::InvalidMeasure { .. }
        | Error::InvalidField(_)
        | Error::UnsupportedField(_)
        | Error::DimensionMismatch { .. } => 1,
        _ => 2,
    }
}

fn real_main(cli: Cli) -> Result<RunOutcome, Error> {
    if cli.list_catalog {
        println!("measures:");
        for id in MeasureSpec::catalog_ids() {
            println!("  {id}");
        }
        println!("presets:");
        for p in PRESETS {
            println!("  {p}");
        }
        return Ok(RunOutcome {
            summary: vec![],
            invariant_violation: false,
        });
    }
    if let Some(name) = &cli.preset {
        return experiment::run_preset(name, &cli.out, cli.seed, cli.resolution_scale);
    }
    match &cli.command {
        Some(Cmd::Run { config }) => {
            let text = std::fs::read_to_string(config)?;
            let mut cfg = ExperimentConfig::from_json(&text)?;
            if let Some(s) = cli.seed {
                cfg.seed = s;
            }
            experiment::run(&cfg, &cli.out, cli.resolution_scale)
        }
        None => Err(Error::Config(
            "nothing to do: pass `run <config.json>`, --preset, or --list-catalog".into(),
        )),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match real_main(cli) {
        Ok(outcome) => {
            for line in &outcome.summary {
                println!("{line}");
            }
            if outcome.invariant_violation {
                eprintln!("invariant violation detected");
                ExitCode::from(2)
            } else {
                ExitCode::SUCCESS
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(error_exit_code(&e))
        }
    }
}
