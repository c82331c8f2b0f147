mod commands;
mod config;
mod manifest;
mod setup;

use std::fmt;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use hns_core::HnsError;

use config::Config;
use manifest::{RunManifest, Status};

#[derive(Debug)]
pub enum CliError {
    Validation(String),
    BlowUp(String),
    Internal(String),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Validation(_) => 2,
            CliError::BlowUp(_) => 3,
            CliError::Internal(_) => 4,
        }
    }

    pub fn status(&self) -> Status {
        match self {
            CliError::BlowUp(_) => Status::Blowup,
            _ => Status::Error,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Validation(m) | CliError::BlowUp(m) | CliError::Internal(m) => f.write_str(m),
        }
    }
}

impl From<HnsError> for CliError {
    fn from(e: HnsError) -> Self {
        let msg = e.to_string();
        match e {
            HnsError::BlowUp { .. } => CliError::BlowUp(msg),
            HnsError::InvalidParams(_)
            | HnsError::InvalidGrid(_)
            | HnsError::RejectedInput(_)
            | HnsError::GridMismatch(_)
            | HnsError::Domain(_)
            | HnsError::InvalidWindow(_)
            | HnsError::Unstable(_)
            | HnsError::Inconclusive { .. } => CliError::Validation(msg),
            _ => CliError::Internal(msg),
        }
    }
}

#[derive(Parser)]
#[command(
    name = "hns",
    version,
    about = "Navier-Stokes and hyperbolic perturbation laboratory"
)]
struct Cli {
    /// Configuration file of key=value lines.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output root; defaults to $HNS_OUT_DIR, then ./runs.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Overwrite an existing run directory.
    #[arg(long, global = true)]
    force: bool,
    /// Worker threads.
    #[arg(long, global = true)]
    workers: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Integrate one model and record probes.
    Simulate(Overrides),
    /// Parameter sweep with convergence-rate fits.
    Sweep {
        #[arg(long)]
        variable: String,
        #[command(flatten)]
        overrides: Overrides,
    },
    /// Randomized checks of the Littlewood-Paley inequalities.
    LpCheck(Overrides),
    /// Finite propagation speed of a localized bump.
    SpeedTest(Overrides),
    /// Smallness conditions of the global existence results.
    Gates(Overrides),
    /// Print the version.
    Version,
}

#[derive(clap::Args)]
struct Overrides {
    /// key=value overrides applied after the config file.
    #[arg(value_name = "KEY=VALUE")]
    set: Vec<String>,
}

fn execute(cli: Cli) -> Result<(), CliError> {
    let (name, overrides, variable) = match &cli.command {
        Command::Version => {
            println!("hns {}", env!("CARGO_PKG_VERSION"));
            return Ok(());
        }
        Command::Simulate(o) => ("simulate", o, None),
        Command::Sweep {
            variable,
            overrides,
        } => ("sweep", overrides, Some(variable)),
        Command::LpCheck(o) => ("lp-check", o, None),
        Command::SpeedTest(o) => ("speed-test", o, None),
        Command::Gates(o) => ("gates", o, None),
    };
    let mut cfg = match &cli.config {
        Some(p) => Config::load(p)?,
        None => Config::default(),
    };
    cfg.apply_overrides(&overrides.set)?;
    if let Some(v) = variable {
        cfg.insert("sweep.variable", v.clone());
    }
    if let Some(w) = cli.workers {
        cfg.insert("workers", w.to_string());
    }
    commands::prepare(name, &mut cfg)?;

    let mut hashed = cfg.clone();
    hashed.remove("workers");
    let run_id = manifest::run_id(name, &hashed.canonical());
    let root = cli
        .out
        .or_else(|| std::env::var_os("HNS_OUT_DIR").map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("runs"));
    let dir = manifest::prepare_dir(&root, &format!("{name}-{}", &run_id[..12]), cli.force)?;

    let workers = setup::workers(&cfg)?;
    let pool = rayon_pool(workers)?;
    let started = manifest::now();
    let outcome = pool.install(|| commands::run(name, &cfg, &dir));
    let (outputs, status, error) = match outcome {
        Ok(o) => (o.outputs, o.status, o.error),
        Err(e) => (Vec::new(), e.status(), Some(e)),
    };
    let mut listed: Vec<String> = outputs
        .iter()
        .map(|p| p.strip_prefix(&dir).unwrap_or(p).display().to_string())
        .collect();
    listed.push("manifest.json".into());
    RunManifest {
        run_id,
        command: name.to_string(),
        version: env!("CARGO_PKG_VERSION").to_string(),
        config_path: cli.config.map(|p| p.display().to_string()),
        config: cfg.entries().clone(),
        outputs: listed,
        started,
        finished: manifest::now(),
        status,
        message: error.as_ref().map(ToString::to_string),
    }
    .write(&dir)?;
    println!("{}", dir.display());
    match error {
        Some(e) => Err(e),
        None => Ok(()),
    }
}

fn rayon_pool(workers: usize) -> Result<rayon::ThreadPool, CliError> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| CliError::Internal(e.to_string()))
}

fn main() -> ExitCode {
    match execute(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
