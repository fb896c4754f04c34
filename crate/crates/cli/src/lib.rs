//! Command-line front end for the `mzi-core` simulator: configuration
//! loading, scenario dispatch, and deterministic file output.

pub mod config;
pub mod error;
pub mod output;
pub mod scenario;

use std::path::{Path, PathBuf};

use clap::Parser;

pub use config::ConfigFile;
pub use error::CliError;
pub use output::Format;
pub use scenario::Scenario;

/// Name of the effective-configuration echo written with every run.
pub const MANIFEST: &str = "run_manifest.json";

#[derive(Debug, Parser)]
#[command(name = "mzi", version, about = "Delayed-choice Mach-Zehnder single-photon simulator")]
pub struct Args {
    #[arg(long, value_enum, env = "MZI_SCENARIO")]
    pub scenario: Scenario,
    /// TOML file, or JSON when the extension is `.json`.
    #[arg(long, env = "MZI_CONFIG")]
    pub config: Option<PathBuf>,
    #[arg(long, env = "MZI_SEED")]
    pub seed: Option<u64>,
    #[arg(long, env = "MZI_TRIALS")]
    pub trials: Option<u64>,
    #[arg(long, env = "MZI_OUT", default_value = ".")]
    pub out: PathBuf,
    #[arg(long, value_enum, env = "MZI_FORMAT", default_value = "csv")]
    pub format: Format,
}

/// File config with command-line overrides applied.
pub fn resolve_config(args: &Args) -> Result<ConfigFile, CliError> {
    let mut cfg = match &args.config {
        Some(path) => ConfigFile::load(path)?,
        None => ConfigFile::default(),
    };
    if let Some(seed) = args.seed {
        cfg.seed = seed;
    }
    if let Some(trials) = args.trials {
        cfg.trials = trials;
    }
    cfg.effective()
}

/// Runs a scenario and writes its outputs plus the manifest into `args.out`.
/// Returns the written paths.
pub fn execute(args: &Args) -> Result<Vec<PathBuf>, CliError> {
    let cfg = resolve_config(args)?;
    let files = scenario::run(args.scenario, &cfg, args.format)?;
    write_outputs(&args.out, &cfg, &files)
}

fn write_outputs(out: &Path, cfg: &ConfigFile, files: &[(String, String)]) -> Result<Vec<PathBuf>, CliError> {
    std::fs::create_dir_all(out).map_err(|e| CliError::Io(format!("cannot create {}: {e}", out.display())))?;
    let mut written = Vec::with_capacity(files.len() + 1);
    for (name, contents) in files {
        written.push(output::write_file(out, name, contents)?);
    }
    written.push(output::write_file(out, MANIFEST, &output::pretty(cfg)?)?);
    Ok(written)
}
