use std::path::Path;
use std::time::Instant;

use ccvae::ccvae::load_checkpoint;
use ccvae::commands::{
    cmd_benchmark, cmd_classify, cmd_evaluate, cmd_generate, cmd_selfcheck, cmd_synth_data, cmd_train, RunConfig,
    SelfcheckOptions,
};
use ccvae::data::{load_dataset, Format, Manifest};
use ccvae::eval::Method;
use ccvae::Error;
use serde_json::Value;

fn small(out: &Path) -> RunConfig {
    let mut cfg = RunConfig {
        out: out.to_path_buf(),
        ..RunConfig::default()
    };
    cfg.data.synthetic.num_classes = 6;
    cfg.data.synthetic.feature_dim = 8;
    cfg.data.synthetic.samples_per_class_per_domain = 30;
    cfg.benchmark.num_unseen = 2;
    cfg.benchmark.num_splits = 2;
    cfg.benchmark.pipeline.train.epochs = 10;
    cfg.benchmark.pipeline.classifier.epochs = 100;
    cfg.resolve().unwrap()
}

#[test]
fn synth_data_defaults_and_repeatability() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = RunConfig {
        out: dir.path().join("a"),
        ..RunConfig::default()
    }
    .resolve()
    .unwrap();
    let out = cmd_synth_data(&cfg).unwrap();
    let s = load_dataset(&out.source, Format::Fvec).unwrap();
    let t = load_dataset(&out.target, Format::Fvec).unwrap();
    assert_eq!((s.len(), t.len(), s.classes().len()), (2000, 2000, 10));
    let m = Manifest::load(&out.manifest).unwrap();
    assert_eq!(m.class_names.len(), 10);
    assert_eq!(m.provenance["config"], cfg.echo());

    let again = cmd_synth_data(&RunConfig {
        out: dir.path().join("b"),
        ..cfg.clone()
    })
    .unwrap();
    assert_eq!(std::fs::read(&out.source).unwrap(), std::fs::read(&again.source).unwrap());
    assert_eq!(std::fs::read(&out.target).unwrap(), std::fs::read(&again.target).unwrap());
}

#[test]
fn zero_feature_dim_is_rejected_by_name() {
    let mut cfg = RunConfig::default();
    cfg.data.synthetic.feature_dim = 0;
    let err = cfg.resolve().unwrap_err().to_string();
    assert!(err.contains("feature_dim"), "{err}");
}

#[test]
fn train_is_quick_repeatable_and_refuses_resume() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = small(&dir.path().join("a"));
    let t0 = Instant::now();
    let out = cmd_train(&cfg).unwrap();
    assert!(t0.elapsed().as_secs() < 60);
    assert_eq!(out.history.epochs.len(), 10);
    let first = std::fs::read(&out.checkpoint).unwrap();
    let again = cmd_train(&cfg).unwrap();
    assert_eq!(first, std::fs::read(&again.checkpoint).unwrap());
    let history = std::fs::read_to_string(&out.loss_history).unwrap();
    assert_eq!(history.lines().count(), 12);

    let err = cmd_train(&RunConfig {
        resume: Some(out.checkpoint.clone()),
        ..cfg
    })
    .unwrap_err();
    assert!(matches!(err, Error::Unsupported(_)), "{err}");
}

#[test]
fn generate_budgets_and_determinism() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = small(&dir.path().join("train"));
    let trained = cmd_train(&cfg).unwrap();
    let data = cmd_synth_data(&RunConfig {
        out: dir.path().join("data"),
        ..cfg.clone()
    })
    .unwrap();
    cfg.generate.checkpoint = Some(trained.checkpoint);
    cfg.generate.input = Some(data.source);

    cfg.generate.per_class = 0;
    cfg.out = dir.path().join("zero");
    let empty = load_dataset(cmd_generate(&cfg).unwrap(), Format::Fvec).unwrap();
    assert_eq!((empty.len(), empty.feature_dim()), (0, 8));

    cfg.generate.per_class = 7;
    cfg.generate.classes = vec![1, 4];
    cfg.out = dir.path().join("seven");
    let gen = load_dataset(cmd_generate(&cfg).unwrap(), Format::Fvec).unwrap();
    assert_eq!(gen.len(), 14);
    assert_eq!(gen.indices_of_class(1).len(), 7);
    assert_eq!(gen.indices_of_class(4).len(), 7);

    cfg.benchmark.pipeline.deterministic_mu = true;
    cfg.out = dir.path().join("mu-a");
    let a = std::fs::read(cmd_generate(&cfg).unwrap()).unwrap();
    cfg.out = dir.path().join("mu-b");
    let b = std::fs::read(cmd_generate(&cfg).unwrap()).unwrap();
    assert_eq!(a, b);
}

#[test]
fn classify_writes_predictions() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = small(&dir.path().join("data"));
    let data = cmd_synth_data(&cfg).unwrap();
    cfg.classify.train = vec![data.target.clone()];
    cfg.classify.test = Some(data.target);
    cfg.out = dir.path().join("clf");
    let out = cmd_classify(&cfg).unwrap();
    assert!(out.accuracy.unwrap() > 0.9);
    assert!(dir.path().join("clf/predictions.csv").exists());
    assert!(out.classifier.exists());
}

#[test]
fn missing_manifest_is_reported_with_its_path() {
    let mut cfg = RunConfig::default();
    cfg.data.manifest = Some("/nonexistent/where/manifest.json".into());
    let err = cmd_benchmark(&cfg.resolve().unwrap()).unwrap_err().to_string();
    assert!(err.contains("/nonexistent/where/manifest.json"), "{err}");
}

#[test]
fn benchmark_table_and_config_echo() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = small(dir.path());
    let result = cmd_benchmark(&cfg).unwrap();
    assert_eq!(result.aggregate.rows.len(), 4);
    assert_eq!(result.reports.len(), 8);
    let table = std::fs::read_to_string(dir.path().join("summary.txt")).unwrap();
    for m in Method::ALL {
        assert!(table.contains(m.label()), "{table}");
    }
    let csv = std::fs::read_to_string(dir.path().join("summary.csv")).unwrap();
    assert_eq!(csv.lines().count(), 6);

    let echo = cfg.echo();
    let first = csv.lines().next().unwrap().strip_prefix("# config: ").unwrap();
    assert_eq!(serde_json::from_str::<Value>(first).unwrap(), echo);
    let summary: Value = serde_json::from_slice(&std::fs::read(dir.path().join("summary.json")).unwrap()).unwrap();
    assert_eq!(summary["run_config"], echo);
    for m in Method::ALL {
        for split in 0..2 {
            let p = dir.path().join(m.key()).join(format!("split-{split}.json"));
            let doc: Value = serde_json::from_slice(&std::fs::read(p).unwrap()).unwrap();
            assert_eq!(doc["run_config"], echo);
            assert_eq!(doc["report"]["config"], serde_json::to_value(&cfg.benchmark.pipeline).unwrap());
        }
    }

    let (reports, _) = cmd_evaluate(&RunConfig {
        out: dir.path().join("eval"),
        ..cfg.clone()
    })
    .unwrap();
    for r in reports {
        let same = result.reports.iter().find(|b| b.method == r.method && b.split_id == 0).unwrap();
        assert_eq!(serde_json::to_value(&r).unwrap(), serde_json::to_value(same).unwrap());
    }

    let train_cfg = RunConfig {
        out: dir.path().join("train"),
        ..cfg
    };
    let trained = cmd_train(&train_cfg).unwrap();
    let (_, header) = load_checkpoint(&trained.checkpoint).unwrap();
    assert_eq!(header, train_cfg.echo());
}

#[test]
fn selfcheck_passes_and_catches_a_broken_gradient() {
    let dir = tempfile::tempdir().unwrap();
    let ok = cmd_selfcheck(&SelfcheckOptions::default(), Some(dir.path())).unwrap();
    assert!(ok.passed(), "{}", ok.to_text());
    assert!(dir.path().join("selfcheck.json").exists());
    let bad = cmd_selfcheck(
        &SelfcheckOptions {
            perturb_gradient: true,
            ..SelfcheckOptions::default()
        },
        None,
    )
    .unwrap();
    assert!(!bad.passed());
}
