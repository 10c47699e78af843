//! Configuration, run driver and studies behind the `psfem` binary.

use std::fmt::Display;
use std::path::PathBuf;

pub mod config;
pub mod run;
pub mod study;
pub mod table;

/// Environment variable naming the directory under which runs write output.
pub const OUTPUT_ROOT_VAR: &str = "PSFEM_OUTPUT_ROOT";

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Config(String),
    #[error(transparent)]
    Solver(#[from] psfem::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl CliError {
    /// Error at config field `path`.
    pub fn config(path: &str, msg: impl Display) -> Self {
        CliError::Config(format!("{path}: {msg}"))
    }

    /// 2 for configuration errors, 1 for everything else.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            _ => 1,
        }
    }
}

pub fn output_root() -> PathBuf {
    std::env::var_os(OUTPUT_ROOT_VAR).map_or_else(|| PathBuf::from("psfem-output"), PathBuf::from)
}

pub fn parse_regime(s: &str) -> Result<psfem::Regime, String> {
    psfem::Regime::ALL
        .into_iter()
        .find(|r| r.name() == s)
        .ok_or_else(|| format!("unknown regime '{s}' (flatland, plane-strain, plane-stress, three-d)"))
}
