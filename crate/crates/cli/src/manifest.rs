use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::Serialize;

use crate::error::Result;
use crate::io::{sha256_file, write_atomic};

/// Record of one run: what was asked, from which inputs, producing which
/// files.
#[derive(Debug, Serialize)]
pub struct RunManifest {
    pub command: String,
    pub config: serde_json::Value,
    pub input_hashes: BTreeMap<String, String>,
    pub tool_version: String,
    pub wall_time_s: f64,
    pub outputs: Vec<String>,
    #[serde(skip_serializing_if = "BTreeMap::is_empty")]
    pub summary: BTreeMap<String, serde_json::Value>,
}

pub struct ManifestBuilder {
    start: Instant,
    manifest: RunManifest,
}

impl ManifestBuilder {
    pub fn new(command: &str, config: impl Serialize) -> ManifestBuilder {
        ManifestBuilder {
            start: Instant::now(),
            manifest: RunManifest {
                command: command.to_string(),
                config: serde_json::to_value(config).expect("config serializes"),
                input_hashes: BTreeMap::new(),
                tool_version: env!("CARGO_PKG_VERSION").to_string(),
                wall_time_s: 0.0,
                outputs: Vec::new(),
                summary: BTreeMap::new(),
            },
        }
    }

    pub fn input(&mut self, path: &Path) -> Result<()> {
        let hash = sha256_file(path)?;
        self.manifest.input_hashes.insert(path.display().to_string(), hash);
        Ok(())
    }

    pub fn output(&mut self, path: &Path) {
        self.manifest.outputs.push(path.display().to_string());
    }

    pub fn summary(&mut self, key: &str, value: impl Serialize) {
        self.manifest
            .summary
            .insert(key.to_string(), serde_json::to_value(value).expect("serializes"));
    }

    /// Writes the manifest to `path`, or next to the first output.
    pub fn finish(mut self, path: Option<&Path>) -> Result<PathBuf> {
        self.manifest.wall_time_s = self.start.elapsed().as_secs_f64();
        let target = match path {
            Some(p) => p.to_path_buf(),
            None => PathBuf::from(format!("{}.manifest.json", self.manifest.outputs[0])),
        };
        let text = serde_json::to_string_pretty(&self.manifest).expect("manifest serializes");
        write_atomic(&target, text.as_bytes())?;
        Ok(target)
    }
}
