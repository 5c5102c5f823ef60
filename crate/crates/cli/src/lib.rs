//! Reproducible experiments on the baker-map fluctuation relations. Each
//! command writes CSV tables and a JSON summary into its output directory.

mod commands;
mod config;

use std::path::PathBuf;

use clap::{Parser, Subcommand};
use rayon::prelude::*;

pub use commands::SCHEMA_VERSION;
pub use config::{expand_sweep, ExperimentConfig, Mode, Overrides};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error(transparent)]
    Core(#[from] baker_fr::Error),
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("config: {0}")]
    Config(String),
}

impl CliError {
    pub(crate) fn io(path: &std::path::Path, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.to_path_buf(),
            source,
        }
    }
}

#[derive(Parser)]
#[command(
    name = "baker-fr",
    version,
    about = "Fluctuation-relation experiments on dissipative baker maps"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    #[command(flatten)]
    pub overrides: Overrides,
}

#[derive(Clone, Copy, Debug, Subcommand)]
pub enum Command {
    /// Invariant x-density, exact and iterated, against the closed form.
    Density,
    /// Fluctuation relation from the exact law or from sampling.
    Fr,
    /// Periodic-orbit expansion of the law of g.
    Upo,
    /// Multibaker current and the optional linear-response sweep.
    Multibaker,
    /// Time-reversal identities on interior sample points.
    Reversibility,
    /// One trajectory with its contraction statistics.
    Trajectory,
}

/// Runs one experiment; `Ok(false)` when a check failed.
pub fn run(command: Command, cfg: &ExperimentConfig) -> Result<bool, CliError> {
    std::fs::create_dir_all(&cfg.out).map_err(|e| CliError::io(&cfg.out, e))?;
    // Rerunnable with `--config <out>/config.toml`.
    let resolved = cfg.out.join("config.toml");
    std::fs::write(&resolved, cfg.to_toml()).map_err(|e| CliError::io(&resolved, e))?;
    match command {
        Command::Density => commands::density(cfg),
        Command::Fr => commands::fr(cfg),
        Command::Upo => commands::upo(cfg),
        Command::Multibaker => commands::multibaker(cfg),
        Command::Reversibility => commands::reversibility(cfg),
        Command::Trajectory => commands::trajectory(cfg),
    }
}

/// Resolves the config from file and flags, then runs one experiment or a
/// whole sweep.
pub fn execute(cli: &Cli) -> Result<bool, CliError> {
    let base = match &cli.overrides.config {
        Some(path) => ExperimentConfig::load(path)?,
        None => ExperimentConfig::default(),
    };
    let base = cli.overrides.apply(base);
    match &cli.overrides.sweep {
        None => run(cli.command, &base),
        Some(path) => {
            let runs = expand_sweep(&base, path)?;
            let results: Vec<Result<bool, CliError>> = runs.par_iter().map(|c| run(cli.command, c)).collect();
            let mut all = true;
            for (k, r) in results.into_iter().enumerate() {
                let ok = r.map_err(|e| CliError::Config(format!("run {k}: {e}")))?;
                println!("run-{k}: {}", if ok { "pass" } else { "FAIL" });
                all &= ok;
            }
            Ok(all)
        }
    }
}
