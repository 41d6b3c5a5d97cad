//! End-to-end pipeline checks driving the compiled binary.

use std::path::Path;
use std::process::{Command, Output};

fn apnn(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_apnn"))
        .args(args)
        .args(["--out", dir.to_str().unwrap()])
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

#[test]
fn generate_train_evaluate_pipeline() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path();

    let gen = apnn(dir, &["generate", "--preset", "gt-hyperbolic-pinn"]);
    assert!(gen.status.success(), "{}", String::from_utf8_lossy(&gen.stderr));
    assert!(stdout(&gen).contains("conservation drift"));
    let dataset = std::fs::read(dir.join("ground_truth.csv")).unwrap();

    // Regeneration is byte-identical.
    assert!(apnn(dir, &["generate", "--preset", "gt-hyperbolic-pinn"]).status.success());
    assert_eq!(std::fs::read(dir.join("ground_truth.csv")).unwrap(), dataset);

    let train = apnn(dir, &["train", "--preset", "gt-hyperbolic-pinn", "--epochs", "8"]);
    assert!(train.status.success(), "{}", String::from_utf8_lossy(&train.stderr));
    let checkpoint = std::fs::read(dir.join("checkpoint.csv")).unwrap();
    let history = std::fs::read_to_string(dir.join("history.csv")).unwrap();
    assert_eq!(history.lines().filter(|l| !l.starts_with('#')).count(), 8);

    // Retraining reproduces the checkpoint bytes.
    assert!(apnn(dir, &["train", "--preset", "gt-hyperbolic-pinn", "--epochs", "8"])
        .status
        .success());
    assert_eq!(std::fs::read(dir.join("checkpoint.csv")).unwrap(), checkpoint);

    let eval = apnn(
        dir,
        &["evaluate", "--preset", "gt-hyperbolic-pinn", "--slice", "0.45"],
    );
    assert!(eval.status.success(), "{}", String::from_utf8_lossy(&eval.stderr));
    assert!(stdout(&eval).contains("relative L2 error, rho"));
    let metrics = std::fs::read_to_string(dir.join("metrics.csv")).unwrap();
    assert!(metrics.lines().any(|l| l.starts_with("field_error.rho,")));
    assert!(dir.join("pred_rho.csv").exists());
    assert!(dir.join("pred_j.csv").exists());
    let slice = std::fs::read_to_string(dir.join("slice_rho_t0.45.csv")).unwrap();
    assert_eq!(slice.lines().filter(|l| !l.starts_with('#')).count(), 200);
}

#[test]
fn training_without_a_dataset_is_an_io_failure() {
    let tmp = tempfile::tempdir().unwrap();
    let out = apnn(tmp.path(), &["train", "--preset", "gt-hyperbolic-dnn"]);
    assert_eq!(out.status.code(), Some(3), "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn an_unknown_preset_is_a_config_failure() {
    let tmp = tempfile::tempdir().unwrap();
    let out = apnn(tmp.path(), &["generate", "--preset", "gt-mystery"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn zero_epoch_training_writes_the_initialization_only() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path();
    assert!(apnn(dir, &["generate", "--preset", "gt-hyperbolic-dnn"]).status.success());
    let out = apnn(dir, &["train", "--preset", "gt-hyperbolic-dnn", "--epochs", "0"]);
    assert!(out.status.success());
    assert!(dir.join("checkpoint.csv").exists());
    assert!(!dir.join("history.csv").exists(), "no epochs ran, so no history");
}

#[test]
fn config_documents_drive_the_pipeline_and_reject_typos() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path();
    let cfg = apnn_cli::config::resolve(Some("gt-hyperbolic-dnn"), None).unwrap();
    let path = dir.join("run.toml");
    std::fs::write(&path, cfg.to_toml().unwrap()).unwrap();

    let gen = apnn(dir, &["generate", "--config", path.to_str().unwrap()]);
    assert!(gen.status.success(), "{}", String::from_utf8_lossy(&gen.stderr));
    let train = apnn(
        dir,
        &["train", "--config", path.to_str().unwrap(), "--epochs", "3", "--seed", "7"],
    );
    assert!(train.status.success(), "{}", String::from_utf8_lossy(&train.stderr));

    let broken = dir.join("broken.toml");
    std::fs::write(&broken, format!("{}\nmystery_knob = true\n", cfg.to_toml().unwrap())).unwrap();
    let out = apnn(dir, &["generate", "--config", broken.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("mystery_knob"));
}
