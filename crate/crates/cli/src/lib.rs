//! Command-line orchestration for `qsr`: configuration resolution, the
//! five subcommands and artifact emission.

pub mod commands;
pub mod config;
pub mod output;

use std::path::Path;

pub use commands::{execute, parse_injected_d, CliError, Command, Options, Summary};
pub use config::{ConfigError, RawConfig, RunConfig};

/// Command-line overrides applied after the file and the environment.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub sets: Vec<String>,
    pub out: Option<String>,
    pub formats: Option<String>,
    pub seed: Option<u64>,
}

/// Defaults, then `config_file`, then `env`, then `overrides`.
pub fn resolve_config<I>(config_file: Option<&Path>, env: I, overrides: &Overrides) -> Result<RunConfig, ConfigError>
where
    I: IntoIterator<Item = (String, String)>,
{
    let mut raw = RawConfig::default();
    if let Some(p) = config_file {
        raw.merge_file(p)?;
    }
    raw.merge_env(env)?;
    for s in &overrides.sets {
        let (k, v) = s
            .split_once('=')
            .ok_or_else(|| ConfigError::Invalid(format!("--set expects KEY=VALUE, got '{s}'")))?;
        raw.set(k, v)?;
    }
    if let Some(o) = &overrides.out {
        raw.set("output.directory", o)?;
    }
    if let Some(f) = &overrides.formats {
        raw.set("output.formats", f)?;
    }
    if let Some(s) = overrides.seed {
        raw.set("seed", &s.to_string())?;
    }
    RunConfig::from_raw(raw)
}
