//! Experiment runner for hyperell: config parsing, subcommands, CSV output and `verify` suites.

pub mod commands;
pub mod config;
pub mod record;
pub mod verify;

use std::path::PathBuf;

use hyperell_core::{Budget, Error};

use config::{parse_config, Command, ConfigFile, RunConfig, Settings};

/// Reads the optional config file, merges flags and the environment, and validates.
pub fn load(command: Command, config_path: Option<&PathBuf>, flags: &Settings) -> Result<RunConfig, Error> {
    let file = match config_path {
        Some(p) => {
            let text = std::fs::read_to_string(p)
                .map_err(|e| Error::Domain(format!("cannot read config {}: {e}", p.display())))?;
            parse_config(&text)?
        }
        None => ConfigFile::default(),
    };
    let env = match std::env::var(hyperell_core::budget::BUDGET_ENV) {
        Ok(_) => Some(Budget::from_env()?),
        Err(_) => None,
    };
    RunConfig::resolve(command, &file, flags, env)
}

/// Runs a resolved config, writes its output, and returns the process exit code.
pub fn execute(cfg: &RunConfig) -> i32 {
    let outcome = commands::run(cfg);
    let write = match &cfg.output {
        Some(path) if !outcome.text.is_empty() => record::write_atomic(path, &outcome.text),
        _ => {
            print!("{}", outcome.text);
            Ok(())
        }
    };
    if let Err(e) = write {
        eprintln!("error: writing output: {e}");
        return 2;
    }
    match outcome.error {
        None => 0,
        Some(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
