//! `distdp` runs the registered simulation experiments and writes their
//! results as CSV.

mod config;
mod experiments;
mod output;

use std::fs::File;
use std::io::{self, BufWriter};
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand};

use config::{ConfigFile, Params};
use experiments::REGISTRY;
use output::write_csv;

#[derive(Debug, Parser)]
#[command(name = "distdp", version, about = "Simulate and audit differentially private protocols")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run one experiment and write its rows as CSV.
    Run {
        /// TOML file with any of the flag names as keys; flags take precedence.
        #[arg(long)]
        config: Option<PathBuf>,
        #[command(flatten)]
        flags: ConfigFile,
    },
    /// List the registered experiments.
    List,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

fn dispatch(command: Command) -> Result<()> {
    match command {
        Command::List => {
            for e in REGISTRY {
                println!("{:<24} {:<8} {} ({})", e.name, e.criteria, e.description, e.anchor);
            }
            Ok(())
        }
        Command::Run { config, flags } => {
            let file = match config {
                Some(path) => ConfigFile::load(&path)?,
                None => ConfigFile::default(),
            };
            run(file.overridden_by(flags))
        }
    }
}

fn run(cfg: ConfigFile) -> Result<()> {
    let names = || REGISTRY.iter().map(|e| e.name).collect::<Vec<_>>().join(", ");
    let Some(name) = cfg.experiment.as_deref() else {
        anyhow::bail!("missing `experiment`; choose one of: {}", names());
    };
    let Some(exp) = experiments::find(name) else {
        anyhow::bail!("invalid value for `experiment`: unknown experiment `{name}`; choose one of: {}", names());
    };
    let params = Params::resolve(&cfg, exp.defaults)?;
    let rows = (exp.run)(&params)?;
    match &cfg.out {
        Some(path) => {
            let f = File::create(path).with_context(|| format!("creating {}", path.display()))?;
            write_csv(exp.name, &rows.rows, BufWriter::new(f))
        }
        None => write_csv(exp.name, &rows.rows, io::stdout().lock()),
    }
}
