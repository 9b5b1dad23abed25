//! Command-line interface: `fpkern run <config>` executes one declarative
//! experiment, `fpkern kernel-check <config>` runs the kernel property suite
//! for the config's kernel. Exit codes: 0 success, 1 configuration or I/O
//! problems, 2 numerical failures (including failed kernel properties).

pub mod config;
pub mod run;

pub use config::{ExperimentConfig, ExperimentKind};
pub use run::{run, RunArtifacts};

use crate::error::{Error, Result};

use clap::{Parser, Subcommand};
use std::path::{Path, PathBuf};

#[derive(Parser)]
#[command(name = "fpkern", version, about = "Spatio-temporal kernel experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the experiment described by a TOML config.
    Run {
        config: PathBuf,
        /// Output directory (default: the config file's stem next to it).
        #[arg(long)]
        out_dir: Option<PathBuf>,
        /// Override the config's seed.
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        quiet: bool,
    },
    /// Run the kernel property suite for the config's kernel.
    KernelCheck {
        config: PathBuf,
        #[arg(long)]
        out_dir: Option<PathBuf>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        quiet: bool,
    },
}

fn load_config(path: &Path) -> Result<(ExperimentConfig, Vec<u8>)> {
    let bytes = std::fs::read(path)
        .map_err(|e| Error::Config(format!("reading {}: {e}", path.display())))?;
    let text = std::str::from_utf8(&bytes)
        .map_err(|e| Error::Config(format!("{} is not UTF-8: {e}", path.display())))?;
    let config = ExperimentConfig::from_toml_str(text)?;
    Ok((config, bytes))
}

fn default_out_dir(config_path: &Path) -> PathBuf {
    let stem = config_path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "out".into());
    config_path
        .parent()
        .unwrap_or_else(|| Path::new("."))
        .join(format!("{stem}_out"))
}

fn execute(
    config_path: &Path,
    out_dir: Option<PathBuf>,
    seed: Option<u64>,
    quiet: bool,
    force_kernel_check: bool,
) -> Result<RunArtifacts> {
    let (mut config, bytes) = load_config(config_path)?;
    if force_kernel_check {
        config.kind = ExperimentKind::KernelCheck;
    }
    let out = out_dir.unwrap_or_else(|| default_out_dir(config_path));
    let config_dir = config_path
        .parent()
        .unwrap_or_else(|| Path::new("."))
        .to_path_buf();
    let artifacts = run::run(&config, &bytes, &config_dir, &out, seed, quiet)?;
    let failures = artifacts.metrics.failed_properties();
    if !failures.is_empty() {
        let names: Vec<&str> = failures.iter().map(|p| p.name.as_str()).collect();
        return Err(Error::Unsupported(format!(
            "kernel properties failed: {}",
            names.join(", ")
        )));
    }
    Ok(artifacts)
}

/// Entry point used by the binary; returns the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            // clap handles --help/--version through this path as well
            let _ = e.print();
            return if e.use_stderr() { 1 } else { 0 };
        }
    };
    let (result, quiet) = match cli.command {
        Command::Run {
            config,
            out_dir,
            seed,
            quiet,
        } => (execute(&config, out_dir, seed, quiet, false), quiet),
        Command::KernelCheck {
            config,
            out_dir,
            seed,
            quiet,
        } => (execute(&config, out_dir, seed, quiet, true), quiet),
    };
    match result {
        Ok(artifacts) => {
            if !quiet {
                eprintln!("ok (seed {})", artifacts.seed);
            }
            0
        }
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
