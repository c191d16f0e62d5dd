//! End-to-end command-line behavior: flows, formats, and exit codes.

use std::path::Path;
use std::process::{Command, Output};

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_mono-attrib"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(output: &Output) -> String {
    String::from_utf8_lossy(&output.stdout).into_owned()
}

#[test]
fn attribute_prints_log_example_values() {
    let out = run(&[
        "attribute",
        "--model",
        "zoo:log_diminishing",
        "--method",
        "bshap",
        "--explicand",
        "4,1",
    ]);
    assert!(out.status.success());
    let text = stdout(&out);
    assert!(text.contains("2.661505"), "{text}");
    assert!(text.contains("1.250518"), "{text}");
}

#[test]
fn attribute_json_is_parseable() {
    let out = run(&[
        "attribute",
        "--model",
        "zoo:quadratic_separable",
        "--method",
        "ig",
        "--explicand",
        "2,2",
        "--json",
    ]);
    assert!(out.status.success());
    let doc: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    let values = doc["values"].as_array().unwrap();
    assert!((values[0].as_f64().unwrap() - 5.0).abs() < 1e-9);
    assert!((values[1].as_f64().unwrap() - 4.0).abs() < 1e-9);
}

#[test]
fn attribute_rejects_out_of_bounds_explicand() {
    let out = run(&[
        "attribute",
        "--model",
        "zoo:quadratic_separable",
        "--method",
        "ig",
        "--explicand",
        "9,9",
    ]);
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn unknown_model_is_a_usage_error() {
    let out = run(&[
        "attribute",
        "--model",
        "zoo:nope",
        "--method",
        "ig",
        "--explicand",
        "1,1",
    ]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("unknown example"));
}

#[test]
fn missing_required_flag_exits_2() {
    let out = run(&["attribute", "--method", "ig"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn check_mono_clean_and_violated_exit_codes() {
    let clean = run(&[
        "check-mono",
        "--model",
        "zoo:log_diminishing",
        "--samples",
        "500",
        "--seed",
        "3",
    ]);
    assert_eq!(clean.status.code(), Some(0), "{}", stdout(&clean));

    // Probing the quadratic's weak pair as strong flips the verdict.
    let dir = tempfile::tempdir().unwrap();
    let spec = dir.path().join("spec.json");
    std::fs::write(
        &spec,
        r#"{"individual":[0,1],"weak_pairs":[],"strong_pairs":[[0,1]]}"#,
    )
    .unwrap();
    let violated = run(&[
        "check-mono",
        "--model",
        "zoo:quadratic_separable",
        "--spec",
        spec.to_str().unwrap(),
        "--samples",
        "3000",
        "--seed",
        "3",
    ]);
    assert_eq!(violated.status.code(), Some(1), "{}", stdout(&violated));
    assert!(stdout(&violated).contains("violated"));
}

#[test]
fn audit_exit_code_reflects_verdicts() {
    let violating = run(&[
        "audit",
        "--model",
        "zoo:log_diminishing",
        "--samples",
        "300",
        "--seed",
        "5",
    ]);
    assert_eq!(violating.status.code(), Some(1));
    assert!(stdout(&violating).contains("violated"));

    // No strong pairs declared and every applicable cell clean: exit 0.
    let clean = run(&[
        "audit",
        "--model",
        "zoo:quadratic_separable",
        "--samples",
        "300",
        "--seed",
        "5",
    ]);
    assert_eq!(clean.status.code(), Some(0), "{}", stdout(&clean));
}

#[test]
fn train_evaluate_and_gen_data_flow() {
    let dir = tempfile::tempdir().unwrap();
    let model_path = dir.path().join("model.json");
    let train = run(&[
        "train",
        "--data",
        "synthetic:2000",
        "--seed",
        "9",
        "--epochs",
        "10",
        "--out",
        model_path.to_str().unwrap(),
    ]);
    assert_eq!(train.status.code(), Some(0), "{}", stdout(&train));
    assert!(model_path.exists());
    assert!(stdout(&train).contains("certified"));

    let evaluate = run(&[
        "evaluate",
        "--model",
        model_path.to_str().unwrap(),
        "--data",
        "synthetic:2000",
        "--seed",
        "10",
    ]);
    assert_eq!(evaluate.status.code(), Some(0));
    let text = stdout(&evaluate);
    let auc: f64 = text.trim().strip_prefix("AUC = ").unwrap().parse().unwrap();
    assert!(auc > 0.6, "held-out AUC {auc}");

    let csv_path = dir.path().join("data.csv");
    let gen = run(&[
        "gen-data",
        "--n",
        "500",
        "--seed",
        "4",
        "--out",
        csv_path.to_str().unwrap(),
    ]);
    assert_eq!(gen.status.code(), Some(0));
    let header = std::fs::read_to_string(&csv_path).unwrap();
    assert!(header.starts_with("SeriousDlqin2yrs,"));

    // The generated file feeds straight back into training.
    let retrain = run(&[
        "train",
        "--data",
        csv_path.to_str().unwrap(),
        "--seed",
        "4",
        "--epochs",
        "3",
        "--out",
        dir.path().join("model2.json").to_str().unwrap(),
    ]);
    assert_eq!(retrain.status.code(), Some(0), "{}", stdout(&retrain));

    // Trained model files work as attribution targets.
    let attr = run(&[
        "attribute",
        "--model",
        model_path.to_str().unwrap(),
        "--method",
        "bshap",
        "--explicand",
        "3,1,1,1,0.11,6250,3,0,2",
    ]);
    assert_eq!(attr.status.code(), Some(0), "{}", stdout(&attr));
    assert!(stdout(&attr).contains("past_due_90"));
}

#[test]
fn gen_data_rejects_tiny_n_with_usage_exit() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&[
        "gen-data",
        "--n",
        "10",
        "--seed",
        "1",
        "--out",
        dir.path().join("x.csv").to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn audit_grid_flags_require_each_other() {
    let out = run(&[
        "audit",
        "--model",
        "zoo:log_diminishing",
        "--samples",
        "100",
        "--grid-dims",
        "0,1",
    ]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn audit_writes_csv_tables() {
    let dir = tempfile::tempdir().unwrap();
    let out_path = dir.path().join("report.csv");
    let out = run(&[
        "audit",
        "--model",
        "zoo:log_diminishing",
        "--samples",
        "200",
        "--seed",
        "2",
        "--explicand",
        "4,1",
        "--grid-dims",
        "0,1",
        "--grid-levels",
        "0,1,2",
        "--out",
        out_path.to_str().unwrap(),
        "--format",
        "csv",
    ]);
    assert_eq!(out.status.code(), Some(1)); // log model: coalition engine violates
    for section in ["attributions", "verdicts", "monotonicity", "grid", "series"] {
        let file = dir.path().join(format!("report.{section}.csv"));
        assert!(file.exists(), "missing {section} table");
    }
    let manifest: serde_json::Value = serde_json::from_str(
        &std::fs::read_to_string(dir.path().join("report.manifest.json")).unwrap(),
    )
    .unwrap();
    assert_eq!(manifest["tables"].as_array().unwrap().len(), 5);
}

#[test]
fn ingestion_reports_drops_on_stderr() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("rows.csv");
    std::fs::write(
        &csv,
        "y,x1,x2,x3,x4,x5,x6,x7,x8,x9\n\
         1,1,0,2,0.5,0.3,5000,6,1,2\n\
         0,0,0,0,0.2,,3000,4,0,0\n\
         0,9,0,0,0.1,0.1,2000,3,0,1\n\
         1,0,1,0,0.4,0.2,4000,5,2,3\n",
    )
    .unwrap();
    let out = run(&[
        "evaluate",
        "--model",
        Path::new("nonexistent.json").to_str().unwrap(),
        "--data",
        csv.to_str().unwrap(),
    ]);
    // Nonexistent model file: runtime error before data loading matters.
    assert_eq!(out.status.code(), Some(3));
}
