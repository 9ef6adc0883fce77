// SPDX-License-Identifier: Apache-2.0

//! `simulate`: runs a configured sweep or a named figure recipe.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use xbar_detect::harness::{emit_csv, recipe, run_experiment, run_recipe, RECIPES};
use xbar_detect::{Error, ExperimentConfig};

const EXIT_CONFIG: u8 = 2;
const EXIT_RUNTIME: u8 = 3;

#[derive(Debug, Parser)]
#[command(name = "simulate", version, about = "Monte Carlo simulator for crossbar MIMO detectors")]
struct Args {
    /// TOML experiment configuration; omitted keys take their defaults.
    #[arg(long)]
    config: PathBuf,
    /// Master seed, overrides SIM_SEED and the config file.
    #[arg(long)]
    seed: Option<u64>,
    /// Output CSV; for recipes, the stem of the per-series files.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads (default: all cores).
    #[arg(long)]
    threads: Option<usize>,
    #[arg(long, value_parser = clap::builder::PossibleValuesParser::new(RECIPES))]
    recipe: Option<String>,
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Config(_) => EXIT_CONFIG,
        _ => EXIT_RUNTIME,
    }
}

fn resolve_seed(cli: Option<u64>, cfg: u64) -> Result<u64, Error> {
    if let Some(s) = cli {
        return Ok(s);
    }
    match std::env::var("SIM_SEED") {
        Ok(v) => v.trim().parse().map_err(|_| Error::Config(format!("SIM_SEED is not an unsigned integer: '{v}'"))),
        Err(_) => Ok(cfg),
    }
}

fn run(args: Args) -> Result<(), Error> {
    let mut cfg = ExperimentConfig::load(&args.config)?;
    cfg.seed = resolve_seed(args.seed, cfg.seed)?;
    let out = args.out.unwrap_or_else(|| PathBuf::from(&cfg.out_path));
    if let Some(n) = args.threads {
        if n == 0 {
            return Err(Error::Config("--threads must be at least 1".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| Error::Config(format!("thread pool: {e}")))?;
    }
    match args.recipe {
        Some(name) => {
            let r = recipe(&name, &cfg)?;
            let results = run_recipe(&r, &out)?;
            for s in results {
                log::info!("wrote {}", s.csv_path.display());
            }
        }
        None => {
            let rows = run_experiment(&cfg)?;
            emit_csv(&rows, &out)?;
            log::info!("wrote {}", out.display());
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    match run(Args::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            log::error!("{e}");
            eprintln!("simulate: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
