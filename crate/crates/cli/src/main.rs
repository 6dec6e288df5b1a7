//! `fclt-lab`: runs block-process experiments from TOML configs.
//!
//! Exit codes: 0 success, 1 other failure, 2 unknown experiment kind,
//! 3 output not writable, 4 invalid config, model or input.

use std::fs::File;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use fclt_core::error::Error;
use fclt_core::experiment::{self, ExperimentConfig, Level};
use fclt_core::metrics::j1_distance;
use fclt_core::pathio::fmt_f64;
use fclt_core::step::StepFunction;

#[derive(Parser)]
#[command(name = "fclt-lab", version, about = "Monte Carlo experiments for block partial-sum processes")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the experiment described by a config file.
    Run {
        config: PathBuf,
        /// Override `reps`.
        #[arg(long)]
        reps: Option<usize>,
        /// Override `seed_base`.
        #[arg(long)]
        seed: Option<u64>,
        /// Override `output_dir`.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Parse a config and report rate and parameter diagnostics.
    Validate { config: PathBuf },
    /// Distances between paths.
    Metric {
        #[command(subcommand)]
        metric: Metric,
    },
}

#[derive(Subcommand)]
enum Metric {
    /// J1 distance between two step functions stored as `t,value` CSV.
    J1 {
        a: PathBuf,
        b: PathBuf,
        /// Bisection tolerance.
        #[arg(long, default_value_t = 1e-6)]
        tol: f64,
    },
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::UnknownExperiment(_) => 2,
        Error::Output { .. } | Error::Io(_) => 3,
        Error::Config(_)
        | Error::Parameter(_)
        | Error::ModelOutsideRange(_)
        | Error::Scheme(_)
        | Error::Domain(_)
        | Error::DivergentMoment(_)
        | Error::Parse(_) => 4,
        _ => 1,
    }
}

fn read_path(p: &PathBuf) -> Result<StepFunction, Error> {
    let f = File::open(p).map_err(|e| Error::Parse(format!("{}: {e}", p.display())))?;
    StepFunction::read_csv(f)
}

fn run(cli: Cli) -> Result<(), Error> {
    match cli.command {
        Command::Run { config, reps, seed, out } => {
            let mut cfg = ExperimentConfig::from_path(&config)?;
            if let Some(r) = reps {
                cfg.reps = r;
            }
            if let Some(s) = seed {
                cfg.seed_base = s;
            }
            if let Some(o) = out {
                cfg.output_dir = o;
            }
            for d in experiment::validate(&cfg) {
                if d.level != Level::Ok {
                    eprintln!("{d}");
                }
            }
            let report = experiment::run(&cfg)?;
            for p in &report.csv_paths {
                println!("wrote {}", p.display());
            }
            println!("wrote {}", report.output_dir.join("summary.json").display());
            if let Some(checks) = report.summary["checks"].as_array() {
                let passed = checks.iter().filter(|c| c["pass"] == true).count();
                println!("checks passed: {passed}/{}", checks.len());
            }
            if let Some(flags) = report.summary["flags"].as_object() {
                for (k, v) in flags {
                    println!("{k}: {v}");
                }
            }
            println!("wall clock: {:.2}s", report.wall_clock_secs);
        }
        Command::Validate { config } => {
            let cfg = ExperimentConfig::from_path(&config)?;
            for d in experiment::validate(&cfg) {
                println!("{d}");
            }
        }
        Command::Metric {
            metric: Metric::J1 { a, b, tol },
        } => {
            let (x, y) = (read_path(&a)?, read_path(&b)?);
            println!("{}", fmt_f64(j1_distance(&x, &y, tol)?));
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
