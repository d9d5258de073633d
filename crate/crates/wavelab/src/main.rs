//! `wavelab` command line: configuration-driven experiment runner.
//!
//! Exit codes: 0 pass, 1 in-run assertion failure, 2 config error,
//! 3 solver failure.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use wavelab::config::ExperimentConfig;
use wavelab::error::Error;
use wavelab::runner;

#[derive(Parser)]
#[command(
    name = "wavelab",
    version,
    about = "numerical laboratory for the exterior defocusing wave equation"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Execute an experiment described by a JSON config
    Run {
        /// path to the experiment config (JSON)
        config: PathBuf,
    },
    /// List the built-in data profiles with their compatibility orders
    Profiles {
        /// substring filter on profile names
        filter: Option<String>,
    },
    /// Re-run a manifest and byte-compare the produced artifacts
    Verify {
        /// path to a manifest.json written by `run`
        manifest: PathBuf,
    },
}

const EXIT_ASSERTION: u8 = 1;
const EXIT_CONFIG: u8 = 2;
const EXIT_SOLVER: u8 = 3;

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match cli.command {
        Command::Run { config } => {
            let cfg = match ExperimentConfig::load(&config) {
                Ok(c) => c,
                Err(e) => {
                    eprintln!("config error: {e}");
                    return ExitCode::from(EXIT_CONFIG);
                }
            };
            match runner::run(&cfg, None) {
                Ok(report) => {
                    if report.passed() {
                        println!(
                            "PASS ({} artifacts in {})",
                            report.artifacts.len(),
                            report.output_dir.display()
                        );
                        ExitCode::SUCCESS
                    } else {
                        for f in &report.failures {
                            eprintln!("FAIL: {f}");
                        }
                        ExitCode::from(EXIT_ASSERTION)
                    }
                }
                Err(e @ Error::Config(_)) => {
                    eprintln!("config error: {e}");
                    ExitCode::from(EXIT_CONFIG)
                }
                Err(e) => {
                    eprintln!("solver failure: {e}");
                    // best-effort diagnostic file next to the outputs
                    let dir = cfg.resolved_output_dir(None);
                    let _ = std::fs::create_dir_all(&dir);
                    let _ = std::fs::write(dir.join("error.txt"), format!("{e}\n"));
                    ExitCode::from(EXIT_SOLVER)
                }
            }
        }
        Command::Profiles { filter } => {
            let entries = runner::list_profiles(filter.as_deref());
            for e in &entries {
                println!(
                    "{:12}  compat order {}  {}",
                    e.name, e.compat_order, e.description
                );
            }
            ExitCode::SUCCESS
        }
        Command::Verify { manifest } => {
            let scratch = match scratch_dir() {
                Ok(d) => d,
                Err(e) => {
                    eprintln!("cannot create scratch directory: {e}");
                    return ExitCode::from(EXIT_SOLVER);
                }
            };
            let outcome = match runner::verify(&manifest, &scratch) {
                Ok(mismatches) if mismatches.is_empty() => {
                    println!("PASS: manifest reproduces byte-identical artifacts");
                    ExitCode::SUCCESS
                }
                Ok(mismatches) => {
                    for m in &mismatches {
                        eprintln!("FAIL: {m}");
                    }
                    ExitCode::from(EXIT_ASSERTION)
                }
                Err(e @ Error::Config(_)) => {
                    eprintln!("config error: {e}");
                    ExitCode::from(EXIT_CONFIG)
                }
                Err(e) => {
                    eprintln!("solver failure: {e}");
                    ExitCode::from(EXIT_SOLVER)
                }
            };
            let _ = std::fs::remove_dir_all(&scratch);
            outcome
        }
    }
}

fn scratch_dir() -> std::io::Result<PathBuf> {
    let base = std::env::temp_dir().join(format!(
        "wavelab-verify-{}-{}",
        std::process::id(),
        std::time::SystemTime::now()
            .duration_since(std::time::UNIX_EPOCH)
            .map(|d| d.as_nanos())
            .unwrap_or(0)
    ));
    std::fs::create_dir_all(&base)?;
    Ok(base)
}
