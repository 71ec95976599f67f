#![allow(clippy::neg_cmp_op_on_partial_ord)] // `!(x > 0.0)` also rejects NaN

mod commands;
mod config;
mod error;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use serde::Serialize;
use serde_json::Value;

use crate::config::ExperimentConfig;
use crate::error::CliError;
use crate::output::Writer;

#[derive(Parser, Debug)]
#[command(
    name = "superrad",
    version,
    about = "Superradiance of indistinguishable V-type and four-level atoms"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Experiment config (TOML).
    #[arg(long, global = true, conflicts_with = "preset")]
    config: Option<PathBuf>,

    /// Built-in preset, e.g. `fig1d`.
    #[arg(long, global = true)]
    preset: Option<String>,

    /// Output directory; overrides `[output] dir`.
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// Worker threads for parallel sweeps and grids.
    #[arg(long, global = true)]
    threads: Option<usize>,
}

#[derive(Subcommand, Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Command {
    /// Integrate the master equation and write intensities.
    Simulate,
    /// Final photonic state or mixture.
    Photonic,
    /// Negativity, conditional entropy and Peres scans.
    Entanglement,
    /// Wigner-function slices.
    Wigner,
    /// Peak intensities against atom number, with power-law fits.
    Scaling,
}

impl Command {
    fn name(self) -> &'static str {
        match self {
            Command::Simulate => "simulate",
            Command::Photonic => "photonic",
            Command::Entanglement => "entanglement",
            Command::Wigner => "wigner",
            Command::Scaling => "scaling",
        }
    }
}

#[derive(Serialize)]
struct Metadata<'a> {
    tool: &'static str,
    version: &'static str,
    command: &'static str,
    source: String,
    /// Identical configs give byte-identical data files.
    reproducible: bool,
    config: &'a ExperimentConfig,
    results: Value,
    files: &'a [String],
}

fn load(cli: &Cli) -> Result<(ExperimentConfig, String), CliError> {
    match (&cli.config, &cli.preset) {
        (Some(path), None) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
            Ok((config::parse(&text)?, format!("config {}", path.display())))
        }
        (None, Some(name)) => Ok((
            config::parse(config::preset(name)?)?,
            format!("preset {name}"),
        )),
        (None, None) => Err(CliError::Config(
            "pass --config <path> or --preset <name>".into(),
        )),
        (Some(_), Some(_)) => Err(CliError::Config(
            "--config and --preset are exclusive".into(),
        )),
    }
}

fn run(cli: &Cli) -> Result<(), CliError> {
    let (cfg, source) = load(cli)?;
    cfg.validate(cli.command)?;
    if let Some(n) = cli.threads {
        if n == 0 {
            return Err(CliError::Config("--threads must be at least 1".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::Runtime(e.to_string()))?;
    }
    let dir = cli
        .out
        .clone()
        .or_else(|| cfg.output.as_ref().map(|o| o.dir.clone()))
        .unwrap_or_else(|| PathBuf::from("out"));
    let mut w = Writer::new(&dir)?;
    let results = match cli.command {
        Command::Simulate => commands::simulate::run(&cfg, &mut w)?,
        Command::Photonic => commands::photonic::run(&cfg, &mut w)?,
        Command::Entanglement => commands::entanglement::run(&cfg, &mut w)?,
        Command::Wigner => commands::wigner::run(&cfg, &mut w)?,
        Command::Scaling => commands::scaling::run(&cfg, &mut w)?,
    };
    let files = w.files.clone();
    let meta = Metadata {
        tool: "superrad",
        version: env!("CARGO_PKG_VERSION"),
        command: cli.command.name(),
        source,
        reproducible: true,
        config: &cfg,
        results,
        files: &files,
    };
    w.json(&format!("{}.meta.json", cli.command.name()), &meta)?;
    for f in &w.files {
        println!("{}", dir.join(f).display());
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("superrad: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
