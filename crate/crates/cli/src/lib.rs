//! Batch front end: TOML configuration, problem assembly and the
//! `run` / `verify` / `converge` subcommands.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod commands;
pub mod config;
pub mod problem;

use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use crate::commands::{EXIT_FAILED, EXIT_USAGE};
use crate::config::RunConfig;

#[derive(Debug, Parser)]
#[command(name = "sdd", version, about = "State-dependent delay PDE solver and estimate probes")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Integrate the configured problem.
    Run(Common),
    /// Run estimate probes.
    Verify {
        #[command(flatten)]
        common: Common,
        /// Comma-separated probe names, or `all`.
        #[arg(long)]
        probes: Option<String>,
    },
    /// Step-refinement study over `converge.dt_list`.
    Converge(Common),
}

#[derive(Debug, Args)]
pub struct Common {
    #[arg(long)]
    pub config: PathBuf,
    /// Output directory; defaults to the config's `output`, then `out`.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Overrides the config seed.
    #[arg(long)]
    pub seed: Option<u64>,
}

fn load(common: &Common) -> Result<(RunConfig, PathBuf), i32> {
    let mut cfg = RunConfig::load(&common.config).map_err(|e| {
        eprint!("{e}");
        EXIT_USAGE
    })?;
    if let Some(seed) = common.seed {
        cfg.seed = seed;
    }
    let out = common
        .out
        .clone()
        .or_else(|| cfg.output.as_ref().map(PathBuf::from))
        .unwrap_or_else(|| Path::new("out").to_path_buf());
    Ok((cfg, out))
}

/// Executes a parsed command line and returns the exit code.
pub fn execute(cli: Cli) -> i32 {
    let result = match &cli.command {
        Command::Run(c) => load(c).map(|(cfg, out)| commands::cmd_run(&cfg, &out)),
        Command::Verify { common, probes } => load(common).and_then(|(cfg, out)| {
            let selector = match probes {
                Some(p) => vec![p.clone()],
                None => cfg.verify.probes.clone(),
            };
            let names = RunConfig::select_probes(&selector).map_err(|e| {
                eprint!("{e}");
                EXIT_USAGE
            })?;
            Ok(commands::cmd_verify(&cfg, &out, &names))
        }),
        Command::Converge(c) => load(c).map(|(cfg, out)| commands::cmd_converge(&cfg, &out)),
    };
    match result {
        Ok(Ok(code)) => code,
        Ok(Err(e)) => {
            eprintln!("error: {e:#}");
            EXIT_FAILED
        }
        Err(code) => code,
    }
}
