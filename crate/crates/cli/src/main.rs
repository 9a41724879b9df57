use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::Context;
use clap::{Parser, Subcommand};
use fpeit_core::scenario::{run_powers, run_solve, run_verify, ErrorSampling, RunConfig};

/// Forward solver for div(sigma grad u) = 0 on the unit disk by formal powers.
#[derive(Parser)]
#[command(name = "fpeit", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Fit boundary data and write coefficients, the boundary fit and a report.
    Solve {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Recompute the fitted trace on Q rays instead of interpolating.
        #[arg(long)]
        dense_error: bool,
        /// Worker threads, 0 for all cores.
        #[arg(long, default_value_t = 0)]
        threads: usize,
    },
    /// Check residuals of the exact solution, the formal powers and the sequence.
    Verify {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, default_value = ".")]
        out: PathBuf,
        #[arg(long, default_value_t = 0)]
        threads: usize,
    },
    /// Write the formal-power table.
    Powers {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 0)]
        threads: usize,
    },
}

enum Failure {
    Breach(String),
    Core(fpeit_core::Error),
    Other(anyhow::Error),
}

impl From<fpeit_core::Error> for Failure {
    fn from(e: fpeit_core::Error) -> Self {
        Failure::Core(e)
    }
}

fn set_threads(threads: usize) -> Result<(), Failure> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global()
        .context("configuring the thread pool")
        .map_err(Failure::Other)
}

fn load(path: &Path) -> Result<RunConfig, Failure> {
    RunConfig::from_path(path).map_err(Failure::Core)
}

fn run(cli: Cli) -> Result<(), Failure> {
    match cli.command {
        Command::Solve {
            config,
            out,
            dense_error,
            threads,
        } => {
            set_threads(threads)?;
            let mut cfg = load(&config)?;
            if dense_error {
                cfg.error_sampling = ErrorSampling::Dense;
            }
            let outcome = run_solve(&cfg, &out)?;
            println!(
                "E = {:.6e}  basis = {}  dropped = {}  ({:.2} s)",
                outcome.result.error,
                outcome.basis.len(),
                outcome.dropped().len(),
                outcome.timing.total_s
            );
        }
        Command::Verify { config, out, threads } => {
            set_threads(threads)?;
            let cfg = load(&config)?;
            let report = run_verify(&cfg, &out)?;
            for c in &report.checks {
                match c.value {
                    Some(v) => println!(
                        "{:<11} {:.3e} (threshold {:.1e}) {}",
                        c.name,
                        v,
                        c.threshold,
                        if c.pass { "ok" } else { "FAIL" }
                    ),
                    None => println!("{:<11} skipped: {}", c.name, c.note),
                }
            }
            if !report.pass {
                return Err(Failure::Breach(report.failed.join(", ")));
            }
        }
        Command::Powers { config, out, threads } => {
            set_threads(threads)?;
            let cfg = load(&config)?;
            let table = run_powers(&cfg, &out)?;
            println!(
                "wrote degrees 0..={} on {} rays",
                table.max_degree(),
                table.mesh().ray_count()
            );
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("FPEIT_LOG", "warn")).init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Breach(names)) => {
            eprintln!("error: threshold exceeded: {names}");
            ExitCode::from(1)
        }
        Err(Failure::Core(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_input_error() { 2 } else { 3 })
        }
        Err(Failure::Other(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
