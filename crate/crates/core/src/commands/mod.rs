//! The operations behind each command-line subcommand. Every file written
//! here embeds the effective [`RunConfig`].

mod config;
mod selfcheck;

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde_json::{json, Value};

pub use config::{ClassifyConfig, DataConfig, GenerateConfig, RunConfig};
pub use selfcheck::{kl_monte_carlo, run_selfcheck, tiny_ccvae_case, Check, SelfcheckOptions, SelfcheckReport};

use crate::ccvae::{generate_for_classes, load_checkpoint, save_checkpoint, TrainHistory};
use crate::classify::{train_linear, ClassifierConfig, TrainSetForClassifier};
use crate::data::{load_dataset, make_task, save_dataset, FeatureDataset, Format, GzsdaTask, Manifest};
use crate::error::{Error, Result};
use crate::eval::{
    aggregate, benchmark_splits, per_class_accuracy, run_benchmark, run_method, train_ccvae,
    write_benchmark, AggregateReport, BenchmarkResult, EvalReport,
};
use crate::nn::{derive_seed, Rng};

fn ensure_dir(dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}

fn write_json(path: &Path, doc: &Value) -> Result<()> {
    let mut text = serde_json::to_string_pretty(doc)?;
    text.push('\n');
    write_text(path, &text)
}

fn format_of(path: &Path) -> Result<Format> {
    Format::from_path(path).ok_or_else(|| Error::Config(format!("{}: unknown dataset extension (use .csv or .fvec)", path.display())))
}

#[derive(Debug, Clone)]
pub struct SynthOutput {
    pub source: PathBuf,
    pub target: PathBuf,
    pub manifest: PathBuf,
}

/// Generates the synthetic benchmark and writes both domains plus a manifest.
pub fn cmd_synth_data(cfg: &RunConfig) -> Result<SynthOutput> {
    let syn = &cfg.data.synthetic;
    syn.validate()?;
    let bench = crate::data::gen_synthetic_benchmark(syn)?;
    ensure_dir(&cfg.out)?;
    let ext = cfg.format.extension();
    let source = cfg.out.join(format!("source.{ext}"));
    let target = cfg.out.join(format!("target.{ext}"));
    save_dataset(&bench.source, &source, cfg.format)?;
    save_dataset(&bench.target, &target, cfg.format)?;
    let manifest = Manifest {
        source: PathBuf::from(format!("source.{ext}")),
        target: PathBuf::from(format!("target.{ext}")),
        format: cfg.format,
        class_names: (0..syn.num_classes).map(|c| format!("class-{c:02}")).collect(),
        provenance: json!({
            "generator": "synthetic two-domain benchmark",
            "seed": cfg.seed,
            "config": cfg.echo(),
        }),
    };
    let manifest_path = cfg.out.join("manifest.json");
    manifest.save(&manifest_path)?;
    Ok(SynthOutput {
        source,
        target,
        manifest: manifest_path,
    })
}

/// The task of split `cfg.split` and that split's seed.
pub fn task_for_split(cfg: &RunConfig, source: &FeatureDataset, target: &FeatureDataset) -> Result<(GzsdaTask, u64)> {
    let splits = benchmark_splits(source, target, &cfg.benchmark, cfg.seed)?;
    let spec = splits.get(cfg.split).ok_or_else(|| {
        Error::Config(format!("split: {} is out of range for {} splits", cfg.split, splits.len()))
    })?;
    Ok((make_task(source, target, spec)?, spec.seed))
}

#[derive(Debug, Clone)]
pub struct TrainOutput {
    pub checkpoint: PathBuf,
    pub loss_history: PathBuf,
    pub history: TrainHistory,
}

pub fn loss_history_csv(history: &TrainHistory, config: &Value) -> String {
    let mut out = format!("# config: {config}\nepoch,recon_s,recon_t,cross_st,cross_ts,kl,lambda,total\n");
    for (i, e) in history.epochs.iter().enumerate() {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{}",
            i + 1,
            e.recon_s,
            e.recon_t,
            e.cross_st,
            e.cross_ts,
            e.kl,
            e.lambda,
            e.total
        );
    }
    out
}

/// Trains the CCVAE of split `cfg.split` and writes `ccvae.ckpt` and
/// `loss_history.csv`.
pub fn cmd_train(cfg: &RunConfig) -> Result<TrainOutput> {
    if let Some(path) = &cfg.resume {
        return Err(Error::Unsupported(format!(
            "resuming from checkpoint {} is not supported; train from scratch",
            path.display()
        )));
    }
    let (source, target) = cfg.load_data()?;
    let (task, split_seed) = task_for_split(cfg, &source, &target)?;
    let (model, history) = train_ccvae(&task, &cfg.benchmark.pipeline, split_seed)?;
    ensure_dir(&cfg.out)?;
    let echo = cfg.echo();
    let checkpoint = cfg.out.join("ccvae.ckpt");
    save_checkpoint(&model, &echo, &checkpoint)?;
    let loss_history = cfg.out.join("loss_history.csv");
    write_text(&loss_history, &loss_history_csv(&history, &echo))?;
    Ok(TrainOutput {
        checkpoint,
        loss_history,
        history,
    })
}

/// Translates records of the input dataset with a trained checkpoint and
/// writes them, labels inherited, as `generated.<ext>` plus a JSON sidecar.
pub fn cmd_generate(cfg: &RunConfig) -> Result<PathBuf> {
    let g = &cfg.generate;
    let ckpt = g
        .checkpoint
        .as_ref()
        .ok_or_else(|| Error::Config("generate.checkpoint: a checkpoint path is required".into()))?;
    let input_path = g
        .input
        .as_ref()
        .ok_or_else(|| Error::Config("generate.input: an input dataset path is required".into()))?;
    let (model, _) = load_checkpoint(ckpt)?;
    let input = load_dataset(input_path, format_of(input_path)?)?;
    let classes: Vec<usize> = if g.classes.is_empty() {
        input.classes().into_iter().collect()
    } else {
        g.classes.clone()
    };
    let mut rng = Rng::new(derive_seed(cfg.seed, "generate", 0));
    let deterministic_mu = cfg.benchmark.pipeline.deterministic_mu;
    let (x, labels) = generate_for_classes(&model, &input, &classes, g.per_class, g.from, g.to, &mut rng, deterministic_mu)?;
    let domains = vec![g.to; labels.len()];
    let out_ds = FeatureDataset::new(x, labels, domains)?;
    ensure_dir(&cfg.out)?;
    let path = cfg.out.join(format!("generated.{}", cfg.format.extension()));
    save_dataset(&out_ds, &path, cfg.format)?;
    write_json(
        &cfg.out.join("generated.json"),
        &json!({"rows": out_ds.len(), "classes": classes, "config": cfg.echo()}),
    )?;
    Ok(path)
}

#[derive(Debug, Clone)]
pub struct ClassifyOutput {
    pub classifier: PathBuf,
    pub predictions: Option<Vec<usize>>,
    /// Mean per-class accuracy on the test set, when one was given.
    pub accuracy: Option<f64>,
}

/// Trains a linear classifier on the pooled training files; with a test file
/// also writes `predictions.csv` and per-class accuracies.
pub fn cmd_classify(cfg: &RunConfig) -> Result<ClassifyOutput> {
    let c = &cfg.classify;
    if c.train.is_empty() {
        return Err(Error::Config("classify.train: at least one training dataset is required".into()));
    }
    let parts = c
        .train
        .iter()
        .map(|p| load_dataset(p, format_of(p)?))
        .collect::<Result<Vec<_>>>()?;
    let refs: Vec<&FeatureDataset> = parts.iter().collect();
    let set = TrainSetForClassifier::from_real(&refs)?;
    let test = c.test.as_ref().map(|p| load_dataset(p, format_of(p)?)).transpose()?;
    let num_classes = c.num_classes.unwrap_or_else(|| {
        let bound = parts.iter().map(FeatureDataset::label_bound).max().unwrap_or(0);
        bound.max(test.as_ref().map_or(0, FeatureDataset::label_bound))
    });
    let clf_cfg = ClassifierConfig {
        seed: derive_seed(cfg.seed, "classify", 0),
        ..cfg.benchmark.pipeline.classifier.clone()
    };
    let (clf, _) = train_linear(&set, num_classes, &clf_cfg)?;
    ensure_dir(&cfg.out)?;
    let echo = cfg.echo();
    let classifier = cfg.out.join("classifier.linc");
    clf.save(&echo, &classifier)?;
    let mut output = ClassifyOutput {
        classifier,
        predictions: None,
        accuracy: None,
    };
    if let Some(test) = test {
        let pred = clf.predict(test.features())?;
        let per_class = per_class_accuracy(&pred, test.labels())?;
        let mean = if per_class.is_empty() {
            0.0
        } else {
            per_class.values().sum::<f64>() / per_class.len() as f64
        };
        let mut csv = format!("# config: {echo}\nrow,prediction,label\n");
        for (i, (p, y)) in pred.iter().zip(test.labels()).enumerate() {
            let _ = writeln!(csv, "{i},{p},{y}");
        }
        write_text(&cfg.out.join("predictions.csv"), &csv)?;
        write_json(
            &cfg.out.join("classify_report.json"),
            &json!({
                "per_class_acc": per_class,
                "mean_per_class_acc": mean,
                "train_counts": set.counts(),
                "config": echo,
            }),
        )?;
        output.predictions = Some(pred);
        output.accuracy = Some(mean);
    }
    Ok(output)
}

/// Runs the configured methods on split `cfg.split` and writes one report
/// per method.
pub fn cmd_evaluate(cfg: &RunConfig) -> Result<(Vec<EvalReport>, AggregateReport)> {
    let (source, target) = cfg.load_data()?;
    let (task, split_seed) = task_for_split(cfg, &source, &target)?;
    let reports = cfg
        .benchmark
        .methods
        .iter()
        .map(|&m| run_method(m, &task, &cfg.benchmark.pipeline, cfg.split, split_seed))
        .collect::<Result<Vec<_>>>()?;
    let echo = cfg.echo();
    for r in &reports {
        let dir = cfg.out.join(r.method.key());
        ensure_dir(&dir)?;
        write_json(&dir.join(format!("split-{}.json", r.split_id)), &json!({"report": r, "run_config": echo}))?;
    }
    let agg = aggregate(&reports)?;
    Ok((reports, agg))
}

/// Every method on every split; writes per-split reports and the summaries.
pub fn cmd_benchmark(cfg: &RunConfig) -> Result<BenchmarkResult> {
    let (source, target) = cfg.load_data()?;
    let result = run_benchmark(&source, &target, &cfg.benchmark, cfg.seed, cfg.threads)?;
    ensure_dir(&cfg.out)?;
    write_benchmark(&result, &cfg.echo(), &cfg.out)?;
    Ok(result)
}

/// Runs the diagnostics and writes `selfcheck.json` when `out` is given.
pub fn cmd_selfcheck(opts: &SelfcheckOptions, out: Option<&Path>) -> Result<SelfcheckReport> {
    let report = run_selfcheck(opts)?;
    if let Some(dir) = out {
        ensure_dir(dir)?;
        write_json(&dir.join("selfcheck.json"), &serde_json::to_value(&report)?)?;
    }
    Ok(report)
}

