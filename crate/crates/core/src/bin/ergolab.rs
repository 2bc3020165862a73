//! Command-line entry point: run experiment suites from a config file,
//! validate configs, and re-render reports from stored raw data.
//!
//! Exit codes: 0 success (including soft numerical failures unless
//! --strict), 1 config validation error, 2 I/O error, 3 failed checks
//! under --strict.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use ergolab::harness::{self, ExperimentConfig};

#[derive(Parser)]
#[command(
    name = "ergolab",
    version,
    about = "Finite-volume laboratory for disordered magnetic Schrödinger dynamics"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Execute the suite selected by the config (or --suite) and write the
    /// report.
    Run {
        /// Path to the TOML experiment config.
        config: PathBuf,
        /// Override the config's suite selector (smoke | acceptance).
        #[arg(long)]
        suite: Option<String>,
        /// Override the master seed.
        #[arg(long)]
        seed: Option<u64>,
        /// Exit nonzero when any check fails.
        #[arg(long)]
        strict: bool,
        /// Output directory for report.txt, raw.json, series/, ensembles/.
        #[arg(long, default_value = "ergolab-out")]
        out: PathBuf,
    },
    /// Re-render a report from a raw output directory, recomputing the
    /// pass/fail flags from the stored values.
    Report {
        /// Directory previously written by `run` (containing raw.json).
        raw_dir: PathBuf,
    },
    /// Check a config file and list every problem.
    Validate {
        /// Path to the TOML experiment config.
        config: PathBuf,
    },
}

fn main() -> ExitCode {
    match dispatch() {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(classify(&err))
        }
    }
}

fn classify(err: &anyhow::Error) -> u8 {
    if let Some(e) = err.downcast_ref::<ergolab::Error>() {
        match e {
            ergolab::Error::Validation { .. } => 1,
            ergolab::Error::Io(_)
            | ergolab::Error::Container(_)
            | ergolab::Error::VersionMismatch { .. } => 2,
            _ => 1,
        }
    } else if err.downcast_ref::<std::io::Error>().is_some() {
        2
    } else {
        1
    }
}

fn dispatch() -> anyhow::Result<ExitCode> {
    let cli = Cli::parse();
    match cli.command {
        Command::Run {
            config,
            suite,
            seed,
            strict,
            out,
        } => {
            let cfg = ExperimentConfig::load(&config)?;
            let problems = cfg.validation_errors();
            if !problems.is_empty() {
                for p in &problems {
                    eprintln!("config error: {p}");
                }
                return Ok(ExitCode::from(1));
            }
            let (report, series) = harness::run(&cfg, suite.as_deref(), seed)?;
            // the configured system's equilibrium state is the natural raw
            // ensemble to persist alongside the records
            let sys = cfg.system_ensemble(seed)?;
            let zero = vec![0.0; sys.geometry.dimension()];
            let base: Vec<ergolab::HermitianOperator> = (0..sys.len())
                .map(|i| {
                    ergolab::hamiltonian::build_hamiltonian(
                        &sys.geometry,
                        sys.realization(i),
                        &zero,
                    )
                })
                .collect::<ergolab::Result<_>>()?;
            let equilibrium =
                ergolab::liouville::equilibrium_state(&cfg.equilibrium_spec(), &sys, &base)?;
            harness::persist_run(&out, &report, &series, Some(&equilibrium.ensemble))?;
            print!("{}", report.render_text());
            println!("written: {}", out.display());
            if strict && !report.all_passed() {
                eprintln!("--strict: {} failed check(s)", report.failed_count());
                return Ok(ExitCode::from(3));
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Report { raw_dir } => {
            let report = harness::rerender(&raw_dir)?;
            print!("{}", report.body_text());
            Ok(ExitCode::SUCCESS)
        }
        Command::Validate { config } => {
            let cfg = ExperimentConfig::load(&config)?;
            let problems = cfg.validation_errors();
            if problems.is_empty() {
                println!("ok: {}", config.display());
                Ok(ExitCode::SUCCESS)
            } else {
                for p in &problems {
                    eprintln!("config error: {p}");
                }
                Ok(ExitCode::from(1))
            }
        }
    }
}
