//! Scenario runner for the collapse simulation kernels: strict JSON configs,
//! deterministic CSV/JSON/SVG artifacts, and the acceptance suite.

pub mod acceptance;
pub mod config;
pub mod output;
pub mod scenarios;
pub mod schema;

use std::path::PathBuf;
use std::time::Instant;

use serde_json::json;
use thiserror::Error;

pub use config::{parse_config, parse_config_str, Kind, ScenarioConfig};
pub use output::RunManifest;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Error)]
pub enum LabError {
    #[error("invalid configuration:\n  {}", .0.join("\n  "))]
    Validation(Vec<String>),
    #[error("run failed: {0}")]
    Runtime(String),
    #[error("acceptance failed: {0}")]
    Acceptance(String),
}

impl LabError {
    pub fn exit_code(&self) -> i32 {
        match self {
            LabError::Validation(_) => 1,
            LabError::Runtime(_) => 2,
            LabError::Acceptance(_) => 3,
        }
    }
}

#[derive(Debug)]
pub struct Execution {
    pub manifest: RunManifest,
    pub notes: Vec<String>,
}

/// Runs a scenario and writes its artifacts, `summary.json` and
/// `manifest.json` into the configured output directory.
pub fn execute(config: &ScenarioConfig) -> Result<Execution, LabError> {
    let started = Instant::now();
    let canonical = serde_json::to_vec(&config.source).expect("serializable");
    let config_sha256 = output::sha256_hex(&canonical);
    let out = scenarios::run_scenario(config)?;
    let mut artifacts = out.artifacts;
    artifacts.push(output::Artifact::json(
        "summary.json",
        &json!({
            "kind": config.kind.name(),
            "seed": config.master_seed,
            "config_sha256": config_sha256,
            "results": out.summary,
        }),
    ));
    let files = output::write_artifacts(&config.output_dir, &artifacts)?;
    let manifest = RunManifest {
        tool: "collapse-lab".into(),
        version: VERSION.into(),
        kind: config.kind.name().into(),
        config_sha256,
        seed: config.master_seed,
        output_dir: config.output_dir.clone(),
        files,
        duration_seconds: started.elapsed().as_secs_f64(),
    };
    let value = serde_json::to_value(&manifest).expect("serializable");
    output::write_artifacts(&config.output_dir, &[output::Artifact::json("manifest.json", &value)])?;
    Ok(Execution { manifest, notes: out.notes })
}

/// Parses, applies command-line overrides and executes.
pub fn run_file(path: &std::path::Path, seed: Option<u64>, out: Option<PathBuf>) -> Result<Execution, LabError> {
    let mut cfg = parse_config(path)?;
    if let Some(s) = seed {
        cfg = cfg.with_seed(s);
    }
    if let Some(dir) = out {
        cfg = cfg.with_output_dir(dir);
    }
    execute(&cfg)
}
