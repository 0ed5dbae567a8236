use std::path::{Path, PathBuf};
use std::time::Instant;

use chrono::{DateTime, Utc};
use serde::Serialize;

/// Written next to every output so a run can be reproduced.
#[derive(Debug, Serialize)]
pub struct RunManifest {
    pub subcommand: String,
    pub parameters: serde_json::Value,
    pub inputs: Vec<PathBuf>,
    pub outputs: Vec<PathBuf>,
    pub seed: Option<u64>,
    pub tool_version: String,
    pub started_at: DateTime<Utc>,
    pub wall_time_seconds: f64,
}

pub struct ManifestBuilder {
    subcommand: String,
    parameters: serde_json::Value,
    inputs: Vec<PathBuf>,
    seed: Option<u64>,
    started_at: DateTime<Utc>,
    clock: Instant,
}

impl ManifestBuilder {
    pub fn start(subcommand: &str, parameters: &impl Serialize, seed: Option<u64>) -> Self {
        Self {
            subcommand: subcommand.to_owned(),
            parameters: serde_json::to_value(parameters).unwrap_or(serde_json::Value::Null),
            inputs: Vec::new(),
            seed,
            started_at: Utc::now(),
            clock: Instant::now(),
        }
    }

    pub fn input(&mut self, path: impl AsRef<Path>) {
        self.inputs.push(path.as_ref().to_path_buf());
    }

    pub fn finish(self, outputs: Vec<PathBuf>) -> RunManifest {
        RunManifest {
            subcommand: self.subcommand,
            parameters: self.parameters,
            inputs: self.inputs,
            outputs,
            seed: self.seed,
            tool_version: env!("CARGO_PKG_VERSION").to_owned(),
            started_at: self.started_at,
            wall_time_seconds: self.clock.elapsed().as_secs_f64(),
        }
    }
}

/// `out.csv` -> `out.csv.manifest.json`; directories get `manifest.json`.
pub fn manifest_path(out: &Path, is_dir: bool) -> PathBuf {
    if is_dir {
        return out.join("manifest.json");
    }
    let mut name = out.file_name().map(|n| n.to_os_string()).unwrap_or_default();
    name.push(".manifest.json");
    out.with_file_name(name)
}
