use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use log::info;

use fiberopt::cli_io::{load_config, write_history, write_snapshot, OptConfig};
use fiberopt::optimizer::{Problem, RunStatus};
use fiberopt::oracle::verification_suite;
use fiberopt::topoderiv::DerivativeTable;
use fiberopt::tensor2d::MaterialCatalog;
use fiberopt::Error;

const EXIT_NON_CONVERGENCE: u8 = 4;
const EXIT_CHECK_FAILED: u8 = 3;

#[derive(Parser)]
#[command(name = "fiberopt", version, about = "Void/isotropic/fiber topology and orientation optimizer")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Optimize the configured cantilever and write snapshots and history.
    Run {
        #[arg(long)]
        config: PathBuf,
        /// Output directory (overrides `output_dir`).
        #[arg(long)]
        out: Option<PathBuf>,
        /// Iteration limit (overrides `max_iters`).
        #[arg(long)]
        max_iters: Option<usize>,
    },
    /// Compare the derivative machinery against its brute-force oracles.
    Verify {
        #[arg(long)]
        config: PathBuf,
    },
    /// Build the derivative table and store it in the cache directory.
    Table {
        #[arg(long)]
        config: PathBuf,
        /// Cache directory (overrides `table_cache`, then `output_dir`).
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run { config, out, max_iters } => run(&config, out, max_iters),
        Command::Verify { config } => verify(&config),
        Command::Table { config, out } => table(&config, out),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

/// Loads a config; any failure here is an input problem.
fn config_from(path: &Path) -> Result<OptConfig, Error> {
    load_config(path).map_err(|e| match e {
        Error::Io(io) => Error::Validation {
            key: "config".into(),
            reason: format!("{}: {io}", path.display()),
        },
        other => other,
    })
}

fn run(path: &Path, out: Option<PathBuf>, max_iters: Option<usize>) -> Result<ExitCode, Error> {
    let mut config = config_from(path)?;
    if let Some(dir) = out {
        config.output_dir = dir;
    }
    if let Some(n) = max_iters {
        config.max_iters = n;
    }
    config.validate()?;
    let dir = config.output_dir.clone();
    config.write_echo(&dir)?;
    let problem = Problem::new(&config)?;
    info!(
        "{}x{} mesh, weight limit {:.6}, {} angles",
        config.nx,
        config.ny,
        problem.weight_limit(),
        config.n_angles
    );
    let design = problem.initial_design()?;
    let result = problem.run_from(design, |snap| {
        let file = write_snapshot(&dir, snap)?;
        info!("step {}: wrote {}", snap.step, file.display());
        Ok(())
    })?;
    write_history(&dir, &result.history)?;
    let last = result.history.last().expect("history holds step 0");
    println!(
        "{:?} after {} steps: J_C = {:.8e}, g_W = {:.3e}, lambda = {:.6e}",
        result.status, last.step, last.compliance, last.weight_violation, last.lambda
    );
    Ok(match result.status {
        RunStatus::Converged => ExitCode::SUCCESS,
        RunStatus::NonConvergence => ExitCode::from(EXIT_NON_CONVERGENCE),
    })
}

fn verify(path: &Path) -> Result<ExitCode, Error> {
    let config = config_from(path)?;
    let checks = verification_suite(&config)?;
    let mut ok = true;
    for c in &checks {
        println!("{} {}: {}", if c.passed { "PASS" } else { "FAIL" }, c.name, c.detail);
        ok &= c.passed;
    }
    Ok(if ok { ExitCode::SUCCESS } else { ExitCode::from(EXIT_CHECK_FAILED) })
}

fn table(path: &Path, out: Option<PathBuf>) -> Result<ExitCode, Error> {
    let config = config_from(path)?;
    let dir = out
        .or_else(|| config.table_cache.clone())
        .unwrap_or_else(|| config.output_dir.clone());
    let catalog = MaterialCatalog::new(&config.materials)?;
    let (_, hit) = DerivativeTable::load_or_build(&catalog, config.n_angles, &dir)?;
    let file = DerivativeTable::cache_path(&dir, &catalog, config.n_angles);
    println!("{} {}", if hit { "cached" } else { "built" }, file.display());
    Ok(ExitCode::SUCCESS)
}
