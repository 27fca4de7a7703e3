#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use stretch_core::Error;

use crate::commands::Ctx;
use crate::config::ExperimentConfig;

/// Length spectra, stretch and rigidity functionals for conformal metrics on the Bolza surface.
#[derive(Parser)]
#[command(name = "stretch", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Experiment configuration (TOML); defaults apply when omitted.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Worker threads; defaults to the available parallelism.
    #[arg(long, global = true)]
    workers: Option<usize>,
    /// Overrides the configured seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output directory.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
}

#[derive(Subcommand, Clone, Copy)]
enum Command {
    /// Build or load the double spectra of g0, g and the comparison metrics.
    Spectrum,
    /// Pressures, entropy, stretch, rigidity functional and the Hessian cross-check.
    Thermo,
    /// Flow variance of 2 phi and the pressure metric form.
    Variance,
    /// Length and Thurston distances, Finsler norm and ratio tails.
    Distance,
    /// Busemann reparametrization integrals against optimizer lengths.
    Conjugacy,
    /// Run the acceptance suite.
    Verify,
}

impl Command {
    fn name(self) -> &'static str {
        match self {
            Command::Spectrum => "spectrum",
            Command::Thermo => "thermo",
            Command::Variance => "variance",
            Command::Distance => "distance",
            Command::Conjugacy => "conjugacy",
            Command::Verify => "verify",
        }
    }
}

fn load(cli: &Cli) -> Result<ExperimentConfig, Error> {
    let mut cfg = match &cli.config {
        Some(p) => ExperimentConfig::load(p)?,
        None => ExperimentConfig::parse(&format!("schema_version = {}\n", config::SCHEMA_VERSION))?,
    };
    if let Some(s) = cli.seed {
        cfg.seed = s;
    }
    if let Some(w) = cli.workers {
        if w == 0 {
            return Err(Error::Config("--workers must be positive".into()));
        }
        rayon::ThreadPoolBuilder::new().num_threads(w).build_global().map_err(|e| Error::Config(e.to_string()))?;
    }
    Ok(cfg)
}

fn run(cli: &Cli) -> Result<bool, Error> {
    let cfg = load(cli)?;
    let out = commands::resolve_out(cli.out.as_deref(), &cfg);
    let ctx = Ctx::new(cfg, out, cli.command.name())?;
    match cli.command {
        Command::Spectrum => commands::spectrum(&ctx),
        Command::Thermo => commands::thermo(&ctx),
        Command::Variance => commands::variance_cmd(&ctx),
        Command::Distance => commands::distance(&ctx),
        Command::Conjugacy => commands::conjugacy(&ctx),
        Command::Verify => commands::verify(&ctx),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = Cli::parse();
    match run(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("{}", commands::error_json(&e));
            ExitCode::from(if matches!(e, Error::Config(_)) { 2 } else { 1 })
        }
    }
}
