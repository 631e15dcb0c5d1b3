use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::data::{gen_synthetic_benchmark, FeatureDataset, Format, Manifest, SyntheticConfig};
use crate::error::{Error, Result};
use crate::eval::BenchmarkConfig;
use crate::nn::derive_seed;

/// Where the source/target datasets come from.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DataConfig {
    /// Manifest naming dataset files; when absent the synthetic benchmark
    /// is generated in memory.
    pub manifest: Option<PathBuf>,
    pub synthetic: SyntheticConfig,
}

/// Settings of the `generate` command.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GenerateConfig {
    pub checkpoint: Option<PathBuf>,
    pub input: Option<PathBuf>,
    pub from: crate::data::Domain,
    pub to: crate::data::Domain,
    /// Rows per requested class.
    pub per_class: usize,
    /// Classes to generate; empty means every class of the input.
    pub classes: Vec<usize>,
}

impl Default for GenerateConfig {
    fn default() -> Self {
        Self {
            checkpoint: None,
            input: None,
            from: crate::data::Domain::Source,
            to: crate::data::Domain::Target,
            per_class: 100,
            classes: Vec::new(),
        }
    }
}

/// Settings of the `classify` command.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ClassifyConfig {
    /// Dataset files pooled into the training set.
    pub train: Vec<PathBuf>,
    pub test: Option<PathBuf>,
    /// Number of classes; inferred from the data when absent.
    pub num_classes: Option<usize>,
}

/// Everything a command needs. Every field has a default; files override
/// defaults and command-line flags override files.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    /// Master seed; every other seed is derived from it.
    pub seed: u64,
    pub out: PathBuf,
    pub format: Format,
    pub threads: usize,
    pub data: DataConfig,
    pub benchmark: BenchmarkConfig,
    /// Split trained by the `train` command and scored by `evaluate`.
    pub split: usize,
    /// Resuming training is not supported; setting this is an error.
    pub resume: Option<PathBuf>,
    pub generate: GenerateConfig,
    pub classify: ClassifyConfig,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            seed: 0,
            out: PathBuf::from("runs/default"),
            format: Format::Fvec,
            threads: 1,
            data: DataConfig::default(),
            benchmark: BenchmarkConfig::default(),
            split: 0,
            resume: None,
            generate: GenerateConfig::default(),
            classify: ClassifyConfig::default(),
        }
    }
}

impl RunConfig {
    /// Reads a JSON config file on top of the defaults.
    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        serde_json::from_str(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))
    }

    /// Fills derived seeds so the echoed config is the one actually used.
    pub fn resolve(mut self) -> Result<Self> {
        self.data.synthetic.seed = derive_seed(self.seed, "synthetic-data", 0);
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        if self.data.manifest.is_none() {
            self.data.synthetic.validate()?;
        }
        self.benchmark.pipeline.train.validate()?;
        self.benchmark.pipeline.classifier.adam.validate()?;
        if self.threads == 0 {
            return Err(Error::Config("threads: must be at least 1".into()));
        }
        if self.benchmark.num_splits == 0 {
            return Err(Error::Config("benchmark.num_splits: must be at least 1".into()));
        }
        Ok(())
    }

    pub fn echo(&self) -> Value {
        serde_json::to_value(self).expect("config serializes")
    }

    /// Source and target datasets named by the manifest, or the synthetic
    /// benchmark.
    pub fn load_data(&self) -> Result<(FeatureDataset, FeatureDataset)> {
        match &self.data.manifest {
            Some(path) => {
                let manifest = Manifest::load(path)?;
                let base = path.parent().unwrap_or(Path::new("."));
                manifest.load_datasets(base)
            }
            None => {
                let b = gen_synthetic_benchmark(&self.data.synthetic)?;
                Ok((b.source, b.target))
            }
        }
    }
}
