use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::{load_dataset, FeatureDataset, Format};
use crate::error::{Error, Result};

/// Names the source/target dataset files of a benchmark and carries the
/// class-name table plus free-form provenance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub source: PathBuf,
    pub target: PathBuf,
    pub format: Format,
    pub class_names: Vec<String>,
    #[serde(default)]
    pub provenance: serde_json::Value,
}

impl Manifest {
    pub fn load(path: impl AsRef<Path>) -> Result<Manifest> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Ok(serde_json::from_str(&text)?)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let text = serde_json::to_string_pretty(self)?;
        std::fs::write(path, text + "\n").map_err(|e| Error::io(path, e))
    }

    /// Loads both datasets, resolving relative paths against `base`.
    pub fn load_datasets(&self, base: &Path) -> Result<(FeatureDataset, FeatureDataset)> {
        let resolve = |p: &Path| if p.is_absolute() { p.to_path_buf() } else { base.join(p) };
        let source = load_dataset(resolve(&self.source), self.format)?;
        let target = load_dataset(resolve(&self.target), self.format)?;
        if !self.class_names.is_empty() {
            source.check_labels(self.class_names.len())?;
            target.check_labels(self.class_names.len())?;
        }
        Ok((source, target))
    }
}
