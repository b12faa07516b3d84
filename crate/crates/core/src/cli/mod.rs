//! Configuration, scenario execution and output for the `adiatomo` binary.

pub mod config;
pub mod output;
pub mod scenario;

use std::fmt;
use std::path::{Path, PathBuf};

pub use config::{validate_config, validate_config_with, ConfigError, Overrides, Scenario, ScenarioConfig};
pub use output::{Cell, Table};
pub use scenario::{run_scenario, RunOutput};

/// Environment variable overriding the configured output directory.
/// `--out` takes precedence over it.
pub const OUT_DIR_ENV: &str = "ADIATOMO_OUT_DIR";

#[derive(Debug)]
pub enum CliError {
    Config(ConfigError),
    Io { path: PathBuf, source: std::io::Error },
    Numeric(crate::Error),
}

impl CliError {
    /// 2 for configuration and output-path problems, 3 for numerical failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) | CliError::Io { .. } => 2,
            CliError::Numeric(_) => 3,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Config(e) => write!(f, "{e}"),
            CliError::Io { path, source } => write!(f, "cannot write {}: {source}", path.display()),
            CliError::Numeric(e) => write!(f, "numerical failure: {e}"),
        }
    }
}

impl std::error::Error for CliError {}

impl From<ConfigError> for CliError {
    fn from(e: ConfigError) -> Self {
        CliError::Config(e)
    }
}

impl From<crate::Error> for CliError {
    fn from(e: crate::Error) -> Self {
        CliError::Numeric(e)
    }
}

pub fn load_config(path: &Path, overrides: &Overrides) -> Result<ScenarioConfig, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Config(ConfigError::Parse(format!("cannot read {}: {e}", path.display()))))?;
    Ok(validate_config_with(&text, overrides)?)
}

/// Validate, run and write a scenario. Returns the written files and the
/// run summary.
pub fn execute(cfg: &ScenarioConfig) -> Result<(Vec<PathBuf>, Vec<String>), CliError> {
    let out = run_scenario(cfg)?;
    let dir = PathBuf::from(&cfg.output.dir);
    let files = output::write_tables(&dir, &out.tables, cfg).map_err(|source| CliError::Io { path: dir, source })?;
    Ok((files, out.summary))
}
