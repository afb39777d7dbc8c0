use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::config::Config;

/// Written next to every command's outputs. The embedded `config` is the
/// fully resolved configuration (seed override applied), so passing the
/// manifest back as `--config` repeats the run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunManifest {
    pub command: String,
    pub seed: u64,
    pub workers: usize,
    pub duration_s: f64,
    pub outputs: Vec<String>,
    pub config: Config,
}

impl RunManifest {
    pub fn file_name(command: &str) -> String {
        format!("{command}_manifest.toml")
    }

    /// Writes the manifest into `dir` and returns its path.
    pub fn write(&self, dir: &Path) -> std::io::Result<PathBuf> {
        let path = dir.join(Self::file_name(&self.command));
        let text = toml::to_string(self).expect("manifest serializes");
        std::fs::write(&path, text)?;
        Ok(path)
    }
}
