//! `sglab`: batch runner for the spectral laboratory.
//!
//! Every subcommand reads an optional `key = value` config file, computes all
//! artifacts in memory, then writes them together into the output directory.

mod commands;
mod config;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use sglab::ErrorKind;

use crate::commands::Outcome;
use crate::config::RunConfig;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("I/O error: {0}")]
    Io(String),
    #[error(transparent)]
    Lab(#[from] sglab::Error),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) => 2,
            CliError::Io(_) => 4,
            CliError::Lab(e) => match e.kind() {
                ErrorKind::Parameter => 2,
                ErrorKind::Precondition => 3,
                ErrorKind::Io => 4,
            },
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "sglab", version, about = "Spectral experiments for SG-elliptic model operators")]
struct Cli {
    /// Config file of `key = value` lines; missing keys take their defaults.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory, overriding `out_dir`.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Also write SVG plots.
    #[arg(long, global = true)]
    svg: bool,
    /// Do not print the summary.
    #[arg(long, global = true)]
    quiet: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, Subcommand)]
enum Command {
    /// Eigenvalues of the discretized operator and a binary archive.
    Spectrum,
    /// Eigenvalue growth fit, measured or synthetic.
    Weyl,
    /// Series norm against direct weighted Sobolev norm on random vectors.
    Norms,
    /// Diophantine conditions, small divisors and failing subsequences.
    Diophantine,
    /// Solve the periodic evolution equation mode by mode.
    Solve,
    /// Exact counterexamples built from Liouville witnesses.
    Counterexample,
}

impl Command {
    fn name(self) -> &'static str {
        match self {
            Command::Spectrum => "spectrum",
            Command::Weyl => "weyl",
            Command::Norms => "norms",
            Command::Diophantine => "diophantine",
            Command::Solve => "solve",
            Command::Counterexample => "counterexample",
        }
    }
}

fn write_outputs(dir: &Path, command: Command, config: &RunConfig, outcome: &Outcome) -> Result<(), CliError> {
    let io = |path: &Path, e: std::io::Error| CliError::Io(format!("{}: {e}", path.display()));
    std::fs::create_dir_all(dir).map_err(|e| io(dir, e))?;
    for a in &outcome.artifacts {
        let path = dir.join(&a.name);
        std::fs::write(&path, &a.bytes).map_err(|e| io(&path, e))?;
    }
    let mut run = format!("command = {}\n", command.name());
    for (k, v) in &config.resolved {
        run.push_str(&format!("{k} = {v}\n"));
    }
    let path = dir.join("run.txt");
    std::fs::write(&path, run).map_err(|e| io(&path, e))?;
    let path = dir.join("summary.txt");
    std::fs::write(&path, outcome.summary.join("\n") + "\n").map_err(|e| io(&path, e))
}

fn run(cli: &Cli) -> Result<(), CliError> {
    let mut config = match &cli.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::defaults(),
    };
    if let Some(dir) = &cli.out {
        config.set_out_dir(dir.clone());
    }
    let outcome = match cli.command {
        Command::Spectrum => commands::spectrum(&config, cli.svg),
        Command::Weyl => commands::weyl(&config, cli.svg),
        Command::Norms => commands::norms(&config, cli.svg),
        Command::Diophantine => commands::diophantine(&config, cli.svg),
        Command::Solve => commands::solve(&config, cli.svg),
        Command::Counterexample => commands::counterexample(&config, cli.svg),
    }?;
    write_outputs(&config.out_dir, cli.command, &config, &outcome)?;
    if !cli.quiet {
        for line in &outcome.summary {
            println!("{line}");
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("sglab {}: {e}", cli.command.name());
            ExitCode::from(e.exit_code())
        }
    }
}
