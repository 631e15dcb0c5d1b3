use std::path::Path;
use std::sync::atomic::{AtomicUsize, Ordering};

use serde::{Deserialize, Serialize};
use serde_json::Value;

use super::aggregate::{aggregate, AggregateReport};
use super::pipeline::{run_method, EvalReport, Method, PipelineConfig};
use crate::data::{make_task, random_splits, FeatureDataset, SplitSpec};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BenchmarkConfig {
    pub num_unseen: usize,
    pub num_splits: usize,
    pub target_train_fraction: f64,
    pub methods: Vec<Method>,
    pub pipeline: PipelineConfig,
}

impl Default for BenchmarkConfig {
    fn default() -> Self {
        Self {
            num_unseen: 5,
            num_splits: 5,
            target_train_fraction: 0.5,
            methods: Method::ALL.to_vec(),
            pipeline: PipelineConfig::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchmarkResult {
    /// Ordered by split, then method.
    pub reports: Vec<EvalReport>,
    pub aggregate: AggregateReport,
}

/// The seen/unseen partitions of a benchmark, over the classes of both sets.
pub fn benchmark_splits(
    source: &FeatureDataset,
    target: &FeatureDataset,
    config: &BenchmarkConfig,
    seed: u64,
) -> Result<Vec<SplitSpec>> {
    let num_classes = source.label_bound().max(target.label_bound());
    let mut splits = random_splits(num_classes, config.num_unseen, config.num_splits, seed)?;
    for s in &mut splits {
        s.target_train_fraction = config.target_train_fraction;
        s.validate()?;
    }
    Ok(splits)
}

/// Every method on every split. Splits run on up to `threads` workers; the
/// result does not depend on the thread count.
pub fn run_benchmark(
    source: &FeatureDataset,
    target: &FeatureDataset,
    config: &BenchmarkConfig,
    seed: u64,
    threads: usize,
) -> Result<BenchmarkResult> {
    if config.methods.is_empty() {
        return Err(Error::Config("benchmark.methods: at least one method is required".into()));
    }
    let splits = benchmark_splits(source, target, config, seed)?;

    let run_split = |i: usize| -> Result<Vec<EvalReport>> {
        let task = make_task(source, target, &splits[i])?;
        config
            .methods
            .iter()
            .map(|&m| run_method(m, &task, &config.pipeline, i, splits[i].seed))
            .collect()
    };

    let workers = threads.clamp(1, splits.len().max(1));
    let mut per_split: Vec<Option<Result<Vec<EvalReport>>>> = (0..splits.len()).map(|_| None).collect();
    if workers == 1 {
        for (i, slot) in per_split.iter_mut().enumerate() {
            *slot = Some(run_split(i));
        }
    } else {
        let next = AtomicUsize::new(0);
        let done: Vec<(usize, Result<Vec<EvalReport>>)> = std::thread::scope(|s| {
            let handles: Vec<_> = (0..workers)
                .map(|_| {
                    s.spawn(|| {
                        let mut out = Vec::new();
                        loop {
                            let i = next.fetch_add(1, Ordering::Relaxed);
                            if i >= splits.len() {
                                break out;
                            }
                            out.push((i, run_split(i)));
                        }
                    })
                })
                .collect();
            handles
                .into_iter()
                .flat_map(|h| h.join().expect("benchmark worker panicked"))
                .collect()
        });
        for (i, r) in done {
            per_split[i] = Some(r);
        }
    }

    let mut reports = Vec::new();
    for r in per_split {
        reports.extend(r.expect("every split ran")?);
    }
    let aggregate = aggregate(&reports)?;
    Ok(BenchmarkResult { reports, aggregate })
}

fn write(path: &Path, contents: impl AsRef<[u8]>) -> Result<()> {
    std::fs::write(path, contents).map_err(|e| Error::io(path, e))
}

/// Writes `<out>/<method>/split-<i>.json`, `summary.csv`, `summary.txt` and
/// `summary.json`. `run_config` is echoed into every file.
pub fn write_benchmark(result: &BenchmarkResult, run_config: &Value, out: &Path) -> Result<()> {
    for r in &result.reports {
        let dir = out.join(r.method.key());
        std::fs::create_dir_all(&dir).map_err(|e| Error::io(&dir, e))?;
        let doc = serde_json::json!({ "report": r, "run_config": run_config });
        let mut text = serde_json::to_string_pretty(&doc)?;
        text.push('\n');
        write(&dir.join(format!("split-{}.json", r.split_id)), text)?;
    }
    let echo = serde_json::to_string(run_config)?;
    write(&out.join("summary.csv"), format!("# config: {echo}\n{}", result.aggregate.to_csv()))?;
    write(&out.join("summary.txt"), format!("{}\nconfig: {echo}\n", result.aggregate.to_table()))?;
    let doc = serde_json::json!({ "aggregate": result.aggregate, "run_config": run_config });
    let mut text = serde_json::to_string_pretty(&doc)?;
    text.push('\n');
    write(&out.join("summary.json"), text)
}
