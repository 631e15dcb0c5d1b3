//! Datasets, file formats, GZSDA task construction, pair sampling and the
//! synthetic two-domain benchmark.

mod dataset;
pub mod io;
mod manifest;
mod pairs;
pub mod synthetic;
mod task;

pub use dataset::{Domain, FeatureDataset};
pub use io::{load_dataset, save_dataset, Format};
pub use manifest::Manifest;
pub use pairs::{sample_pairs, PairBatch, PairSampler};
pub use synthetic::{gen_synthetic_benchmark, DomainShift, SyntheticBenchmark, SyntheticConfig};
pub use task::{make_task, random_splits, GzsdaTask, SplitSpec};
