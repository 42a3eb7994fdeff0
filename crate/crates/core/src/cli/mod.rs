//! Command-line front end: `catalog`, `analyze`, `bound`, `verify`, `sweep`.

mod commands;
pub mod config;
pub mod json;
mod table;

use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

pub use commands::{run_config, verify_checks, with_alpha, Outcome};
pub use config::RunConfig;
pub use table::{read_csv, Table};

#[derive(Debug, Parser)]
#[command(name = "isocap", version, about = "Isocapacitary criteria, rearrangement bounds and a 1D Neumann oracle")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CommandKind {
    Catalog,
    Analyze,
    Bound,
    Verify,
    Sweep,
}

impl CommandKind {
    pub fn as_str(self) -> &'static str {
        match self {
            CommandKind::Catalog => "catalog",
            CommandKind::Analyze => "analyze",
            CommandKind::Bound => "bound",
            CommandKind::Verify => "verify",
            CommandKind::Sweep => "sweep",
        }
    }
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// List the domain families with their parameter ranges.
    Catalog(CommonArgs),
    /// Evaluate the criteria for one domain and exponent set.
    Analyze(CommonArgs),
    /// Tabulate the a-priori bound curves for a datum.
    Bound(CommonArgs),
    /// Solve the 1D model and check every pointwise inequality against it.
    Verify(CommonArgs),
    /// Evaluate a criterion over a parameter grid and locate its decision boundary.
    Sweep(CommonArgs),
}

impl Command {
    pub fn kind(&self) -> CommandKind {
        match self {
            Command::Catalog(_) => CommandKind::Catalog,
            Command::Analyze(_) => CommandKind::Analyze,
            Command::Bound(_) => CommandKind::Bound,
            Command::Verify(_) => CommandKind::Verify,
            Command::Sweep(_) => CommandKind::Sweep,
        }
    }

    pub fn args(&self) -> &CommonArgs {
        match self {
            Command::Catalog(a) | Command::Analyze(a) | Command::Bound(a) | Command::Verify(a) | Command::Sweep(a) => a,
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct CommonArgs {
    /// JSON run configuration.
    #[arg(long)]
    pub config: PathBuf,
    /// Directory for the JSON and CSV artifacts.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Worker threads for sweeps (default: all cores).
    #[arg(long)]
    pub threads: Option<usize>,
    /// Format of the listing on stdout.
    #[arg(long, value_enum, default_value_t = Format::Table)]
    pub format: Format,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
    Table,
}

/// Runs a parsed command line; returns the process exit code.
pub fn run(cli: &Cli) -> anyhow::Result<i32> {
    let args = cli.command.args();
    let text = std::fs::read_to_string(&args.config)
        .map_err(|e| anyhow::anyhow!("cannot read config {}: {e}", args.config.display()))?;
    let config = RunConfig::parse(&text, args.config.parent())?;
    let outcome = run_config(cli.command.kind(), &config, args.threads)?;
    if let Some(dir) = &args.out {
        outcome.write_artifacts(dir)?;
    }
    let text = outcome.render(args.format)?;
    let mut stdout = std::io::stdout().lock();
    if let Err(e) = stdout.write_all(text.as_bytes()).and_then(|_| stdout.flush()) {
        if e.kind() != std::io::ErrorKind::BrokenPipe {
            return Err(e.into());
        }
    }
    for line in &outcome.messages {
        eprintln!("{line}");
    }
    Ok(outcome.exit_code)
}
