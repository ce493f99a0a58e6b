//! Command line front end: reads a JSON run configuration, drives
//! `tractor-core` and writes JSON reports and CSV tables.
//!
//! Exit codes: 0 success, 2 configuration or missing input, 3 a checked
//! identity or comparison failed, 4 a numerical decision was unreliable.

pub mod commands;
pub mod config;
pub mod error;
pub mod report;

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use crate::config::RunConfig;
use crate::error::{CliError, CliResult};

#[derive(Debug, Parser)]
#[command(
    name = "tractor",
    version,
    about = "Prolongation of overdetermined systems: algebra, transport and oracles"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Kostant complex, Hodge dimensions, δ* and the dimension formulas.
    Algebra(Common),
    /// Holonomy solution space and grid reconstruction.
    Prolong(Common),
    /// Compare a previous prolong run with the collocation oracle.
    Verify {
        #[command(flatten)]
        common: Common,
        /// Directory holding `prolong.json`; defaults to `--out`.
        #[arg(long)]
        run: Option<PathBuf>,
    },
    /// Polynomial collocation nullspace.
    Oracle(Common),
}

#[derive(Debug, Args)]
pub struct Common {
    #[arg(long)]
    pub config: PathBuf,
    /// Output directory; overrides `output.directory`.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

impl Common {
    fn resolve(&self) -> CliResult<(RunConfig, PathBuf)> {
        let cfg = RunConfig::load(&self.config)?;
        let out = self
            .out
            .clone()
            .or_else(|| cfg.output.directory.as_ref().map(PathBuf::from))
            .ok_or_else(|| {
                CliError::Config("no output directory: pass --out or set output.directory".into())
            })?;
        Ok((cfg, out))
    }
}

/// Runs one command and writes its artifacts; returns the written paths.
///
/// Failed checks are reported after the artifacts are on disk.
pub fn run(cli: &Cli) -> CliResult<Vec<PathBuf>> {
    let (cfg, out, outcome) = match &cli.command {
        Command::Algebra(c) => {
            let (cfg, out) = c.resolve()?;
            let o = commands::algebra::run(&cfg)?;
            (cfg, out, o)
        }
        Command::Prolong(c) => {
            let (cfg, out) = c.resolve()?;
            let o = commands::prolong::run(&cfg)?;
            (cfg, out, o)
        }
        Command::Oracle(c) => {
            let (cfg, out) = c.resolve()?;
            let o = commands::oracle::run(&cfg)?;
            (cfg, out, o)
        }
        Command::Verify { common, run } => {
            let (cfg, out) = common.resolve()?;
            let run_dir = run.clone().unwrap_or_else(|| out.clone());
            let o = commands::verify::run(&cfg, &run_dir)?;
            (cfg, out, o)
        }
    };
    let written = outcome.write(&out, &cfg.output.formats)?;
    outcome.into_result()?;
    Ok(written)
}
