use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn ccvae(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ccvae")).args(args).output().unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn write_config(dir: &Path, body: &str) -> String {
    let p = dir.join("config.json");
    std::fs::write(&p, body).unwrap();
    p.to_str().unwrap().to_string()
}

#[test]
fn help_lists_every_subcommand() {
    let o = ccvae(&["--help"]);
    assert!(o.status.success());
    let text = String::from_utf8_lossy(&o.stdout);
    for cmd in ["synth-data", "train", "generate", "classify", "evaluate", "benchmark", "selfcheck"] {
        assert!(text.contains(cmd), "{cmd} missing from\n{text}");
    }
}

#[test]
fn selfcheck_exit_codes() {
    let ok = ccvae(&["selfcheck"]);
    assert_eq!(ok.status.code(), Some(0), "{}", String::from_utf8_lossy(&ok.stdout));
    let bad = ccvae(&["selfcheck", "--perturb-gradient"]);
    assert_eq!(bad.status.code(), Some(1));
}

#[test]
fn invalid_config_names_the_field() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), r#"{"data": {"synthetic": {"feature_dim": 0}}}"#);
    let o = ccvae(&["synth-data", "--config", &cfg]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("feature_dim"), "{}", stderr(&o));

    let cfg = write_config(dir.path(), r#"{"sede": 4}"#);
    let o = ccvae(&["synth-data", "--config", &cfg]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("sede"), "{}", stderr(&o));

    let cfg = write_config(dir.path(), r#"{"benchmark": {"pipeline": {"train": {"epoch": 4}}}}"#);
    let o = ccvae(&["synth-data", "--config", &cfg]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("epoch"), "{}", stderr(&o));
}

#[test]
fn missing_paths_are_named() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), r#"{"data": {"manifest": "/no/such/manifest.json"}}"#);
    let o = ccvae(&["benchmark", "--config", &cfg]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("/no/such/manifest.json"), "{}", stderr(&o));

    let o = ccvae(&["--config", "/no/such/config.json", "synth-data"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("/no/such/config.json"), "{}", stderr(&o));
}

#[test]
fn resume_is_refused() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let o = ccvae(&["train", "--out", out, "--resume", "ccvae.ckpt"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("not supported"), "{}", stderr(&o));
}

#[test]
fn flags_override_the_config_file() {
    let dir = tempfile::tempdir().unwrap();
    let from_file = dir.path().join("from-file");
    let from_flag = dir.path().join("from-flag");
    let body = format!(
        r#"{{"seed": 3, "out": "{}", "data": {{"synthetic": {{"num_classes": 3, "feature_dim": 4, "samples_per_class_per_domain": 5}}}}}}"#,
        from_file.display()
    );
    let cfg = write_config(dir.path(), &body);
    let o = ccvae(&["synth-data", "--config", &cfg, "--seed", "9", "--out", from_flag.to_str().unwrap()]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(!from_file.exists());
    let manifest: Value = serde_json::from_slice(&std::fs::read(from_flag.join("manifest.json")).unwrap()).unwrap();
    let echo = &manifest["provenance"]["config"];
    assert_eq!(echo["seed"], 9);
    assert_eq!(echo["data"]["synthetic"]["num_classes"], 3);
}

#[test]
fn train_generate_classify_round() {
    let dir = tempfile::tempdir().unwrap();
    let body = r#"{"data": {"synthetic": {"num_classes": 6, "feature_dim": 6, "samples_per_class_per_domain": 20}},
                   "benchmark": {"num_unseen": 2, "pipeline": {"train": {"epochs": 3}, "classifier": {"epochs": 50}}}}"#;
    let cfg = write_config(dir.path(), body);
    let p = |s: &str| dir.path().join(s).to_str().unwrap().to_string();
    let run = |args: &[&str]| {
        let o = ccvae(args);
        assert!(o.status.success(), "{args:?}: {}", stderr(&o));
    };
    run(&["synth-data", "--config", &cfg, "--out", &p("data")]);
    run(&["train", "--config", &cfg, "--out", &p("train")]);
    run(&[
        "generate",
        "--config",
        &cfg,
        "--out",
        &p("gen"),
        "--checkpoint",
        &p("train/ccvae.ckpt"),
        "--input",
        &p("data/source.fvec"),
        "--per-class",
        "5",
        "--classes",
        "0,2",
    ]);
    run(&[
        "classify",
        "--config",
        &cfg,
        "--out",
        &p("clf"),
        "--train",
        &p("data/source.fvec"),
        "--train",
        &p("gen/generated.fvec"),
        "--test",
        &p("data/target.fvec"),
    ]);
    assert!(dir.path().join("clf/predictions.csv").exists());
    let gen: Value = serde_json::from_slice(&std::fs::read(dir.path().join("gen/generated.json")).unwrap()).unwrap();
    assert_eq!(gen["rows"], 10);
}
