//! Command-line front end: config parsing, the four pipelines, CSV output.

pub mod commands;
pub mod config;

use std::fs;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};

pub use commands::{num, run, Artifact, CliError, Command};
pub use config::{ConfigError, RawConfig, RunConfig};

#[derive(Debug, Parser)]
#[command(name = "raman-memory", version, about = "Raman memory simulator for alkali D1 lines")]
pub struct Args {
    #[command(subcommand)]
    pub command: SubCmd,
}

#[derive(Debug, Subcommand)]
pub enum SubCmd {
    /// Probe susceptibility of the full and Lambda models over a detuning grid.
    Spectrum(Common),
    /// Propagate a rectangular pulse through the medium.
    Propagate(Common),
    /// Scan the probe carrier for the best storage or delay.
    Tune(Common),
    /// Coherent-information curves and the single-photon table.
    Info(Common),
}

#[derive(Debug, clap::Args)]
pub struct Common {
    /// Config file; every key has a default, so this may be omitted.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Output CSV path. Defaults to stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// `section.key=value`, applied after the config file.
    #[arg(long = "override", value_name = "SECTION.KEY=VALUE")]
    pub overrides: Vec<String>,
}

impl SubCmd {
    fn split(&self) -> (Command, &Common) {
        match self {
            SubCmd::Spectrum(c) => (Command::Spectrum, c),
            SubCmd::Propagate(c) => (Command::Propagate, c),
            SubCmd::Tune(c) => (Command::Tune, c),
            SubCmd::Info(c) => (Command::Info, c),
        }
    }
}

/// Where an artifact goes: the main path, or `<stem>.<suffix>.csv` beside it.
pub fn artifact_path(out: &Path, suffix: Option<&str>) -> PathBuf {
    match suffix {
        None => out.to_path_buf(),
        Some(s) => {
            let stem = out.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
            out.with_file_name(format!("{stem}.{s}.csv"))
        }
    }
}

pub fn load_config(path: Option<&Path>, overrides: &[String]) -> Result<RunConfig, CliError> {
    let text = match path {
        None => String::new(),
        Some(p) => fs::read_to_string(p).map_err(|e| {
            ConfigError::new("--config", format!("cannot read {}: {e}", p.display()))
        })?,
    };
    Ok(RunConfig::from_text(&text, overrides)?)
}

/// Runs a parsed command line; returns what was written.
pub fn execute(args: &Args) -> Result<Vec<(Option<PathBuf>, Artifact)>, CliError> {
    let (command, common) = args.command.split();
    let cfg = load_config(common.config.as_deref(), &common.overrides)?;
    let artifacts = run(command, &cfg)?;
    let mut written = Vec::new();
    for a in artifacts {
        let path = common.out.as_deref().map(|o| artifact_path(o, a.suffix));
        match &path {
            Some(p) => fs::write(p, &a.text).map_err(|source| CliError::Io {
                path: p.display().to_string(),
                source,
            })?,
            None => print!("{}", a.text),
        }
        written.push((path, a));
    }
    Ok(written)
}
