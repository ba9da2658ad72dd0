//! Declarative runs: one config file in, CSV tables plus a JSON manifest out.
//!
//! A run is `nematic-homog <command> <config>`. The config is TOML (or JSON
//! when the file ends in `.json`); unknown keys are rejected and every
//! default is written back into `manifest.json` together with SHA-256
//! digests of the outputs. The environment variable
//! [`OUTPUT_DIR_ENV`] overrides `output_dir`.

mod check;
mod commands;
mod config;

use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::numerics::set_numerics;

pub use check::{run_checks, CheckConfig, GateResult};
pub use commands::Outcome;
pub use config::{
    Command, ConvergeConfig, DesignConfig, HomConfig, IdentitiesConfig, MinimizeConfig, ProbeConfig, RunConfig,
};

/// Overrides `output_dir` of every run when set.
pub const OUTPUT_DIR_ENV: &str = "NEMATIC_HOMOG_OUTPUT_DIR";

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_GATE: i32 = 3;
pub const EXIT_NUMERICAL: i32 = 4;

/// Exit code of an error.
pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Gate { .. } => EXIT_GATE,
        Error::Numerical(_) | Error::Resolution(_) => EXIT_NUMERICAL,
        Error::Precondition(_) | Error::Config(_) | Error::Io(_) => EXIT_CONFIG,
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct OutputFile {
    pub file: String,
    pub bytes: u64,
    pub sha256: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct Manifest {
    pub tool: String,
    pub version: String,
    pub command: Command,
    pub exit_code: i32,
    pub status: String,
    pub message: Option<String>,
    pub config: RunConfig,
    pub summary: serde_json::Value,
    pub outputs: Vec<OutputFile>,
}

/// Result of [`run`]: the exit code and the manifest that was written.
#[derive(Debug, Clone)]
pub struct RunReport {
    pub exit_code: i32,
    pub manifest: Manifest,
    pub output_dir: PathBuf,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

/// Parses a config file and resolves it for `command`.
pub fn load_config(path: &Path, command: Command) -> Result<RunConfig> {
    let text = fs::read_to_string(path).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
    let cfg = if path.extension().is_some_and(|e| e == "json") {
        RunConfig::from_json(&text)?
    } else {
        RunConfig::from_toml(&text)?
    };
    let mut cfg = cfg.resolve(command)?;
    if let Some(dir) = std::env::var_os(OUTPUT_DIR_ENV) {
        cfg.output_dir = PathBuf::from(dir);
    }
    Ok(cfg)
}

/// Runs a resolved config, writes its outputs and manifest, and returns the
/// exit code. Errors that occur before the output directory exists are
/// returned as `Err`.
pub fn run(cfg: &RunConfig) -> Result<RunReport> {
    let command = cfg.command.ok_or_else(|| Error::Config("unresolved config".into()))?;
    set_numerics(cfg.numerics);
    let dir = cfg.output_dir.clone();
    fs::create_dir_all(&dir)?;
    let (exit, status, message, outcome) = match commands::dispatch(cfg, &dir) {
        Ok(o) => {
            let (exit, status) = match o.verdict {
                Some(false) if command == Command::Check => (EXIT_GATE, "hypotheses violated"),
                Some(false) => (EXIT_NUMERICAL, "verdict not as claimed"),
                _ => (EXIT_OK, "ok"),
            };
            (exit, status.to_string(), o.message.clone(), o)
        }
        Err(e) => {
            let status = match exit_code(&e) {
                EXIT_GATE => "gate failure",
                EXIT_NUMERICAL => "numerical failure",
                _ => "config error",
            };
            (exit_code(&e), status.to_string(), Some(e.to_string()), Outcome::default())
        }
    };
    let mut outputs = Vec::new();
    for name in &outcome.files {
        let bytes = fs::read(dir.join(name))?;
        outputs.push(OutputFile { file: name.clone(), bytes: bytes.len() as u64, sha256: sha256_hex(&bytes) });
    }
    let manifest = Manifest {
        tool: env!("CARGO_PKG_NAME").to_string(),
        version: env!("CARGO_PKG_VERSION").to_string(),
        command,
        exit_code: exit,
        status,
        message,
        config: cfg.clone(),
        summary: outcome.summary,
        outputs,
    };
    let json = serde_json::to_string_pretty(&manifest).map_err(|e| Error::Io(e.to_string()))?;
    fs::write(dir.join("manifest.json"), json + "\n")?;
    Ok(RunReport { exit_code: exit, manifest, output_dir: dir })
}
