//! Seen/unseen metrics, the four compared methods and the split runner.

mod aggregate;
mod benchmark;
mod metrics;
mod pipeline;

pub use aggregate::{aggregate, AggregateReport, AggregateRow};
pub use benchmark::{benchmark_splits, run_benchmark, write_benchmark, BenchmarkConfig, BenchmarkResult};
pub use metrics::{harmonic_mean, harmonic_summary, mean_sem, per_class_accuracy, HarmonicSummary, MeanSem};
pub use pipeline::{method_seed, run_method, train_ccvae, BudgetPolicy, EvalReport, Method, PipelineConfig};
