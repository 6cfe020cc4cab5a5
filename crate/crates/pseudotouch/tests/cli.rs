//! The `pseudotouch` binary end to end: outputs, determinism and exit codes.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use pseudotouch::pipeline::{split_grasp, split_touch, touch_pairs};
use pseudotouch::ptds::{self, Records};
use pseudotouch::ptnn;
use pseudotouch::report::{validate_grasp_json, validate_recognition_json};
use pseudotouch_core::datasets::SplitSpec;
use pseudotouch_core::grasp::evaluate_grasp_accuracy;
use pseudotouch_core::model::{initial_params, TrainConfig};
use pseudotouch_core::patch::PATCH_SIZE;
use serde_json::Value;
use tempfile::TempDir;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_pseudotouch")).args(args).output().expect("binary runs")
}

fn ok(args: &[&str]) -> Output {
    let out = run(args);
    assert!(out.status.success(), "{args:?} failed: {}", String::from_utf8_lossy(&out.stderr));
    out
}

fn code(args: &[&str]) -> i32 {
    run(args).status.code().expect("exit code")
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn json(path: PathBuf) -> Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

fn touch_data(dir: &Path, n: usize, seed: u64) -> PathBuf {
    ok(&["gen-data", "touch", "--n", &n.to_string(), "--seed", &seed.to_string(), "--out", s(dir)]);
    dir.join("dataset.ptds")
}

fn csv_grid(path: PathBuf) -> Vec<Vec<Option<f64>>> {
    fs::read_to_string(path)
        .unwrap()
        .lines()
        .map(|l| l.split(',').map(|c| if c.is_empty() { None } else { Some(c.parse().unwrap()) }).collect())
        .collect()
}

#[test]
fn touch_generation_is_deterministic() {
    let t = TempDir::new().unwrap();
    let a = touch_data(&t.path().join("a"), 24, 3);
    let b = touch_data(&t.path().join("b"), 24, 3);
    let c = touch_data(&t.path().join("c"), 24, 4);
    assert_eq!(fs::read(&a).unwrap(), fs::read(&b).unwrap());
    assert_ne!(fs::read(&a).unwrap(), fs::read(&c).unwrap());
    assert_eq!(json(t.path().join("a/summary.json"))["records"], 24);
    let config = json(t.path().join("a/config.json"));
    assert_eq!(config["command"], "gen-data touch");
    assert_eq!(config["config"]["dataset"]["seed"], 3);
}

#[test]
fn zero_epochs_keep_the_initial_params_and_zero_lr_keeps_the_loss() {
    let t = TempDir::new().unwrap();
    let data = touch_data(&t.path().join("data"), 40, 1);

    let e0 = t.path().join("e0");
    ok(&["train-pt", "--data", s(&data), "--epochs", "0", "--out", s(&e0)]);
    let ds = ptds::load_dataset(&data).unwrap();
    let Records::Touch(records) = &ds.records else { panic!("touch dataset") };
    let pairs = touch_pairs(&split_touch(records, &SplitSpec::default()).unwrap());
    let expected = initial_params(&pairs.train, &TrainConfig::default()).unwrap();
    let saved = ptnn::load_params(&e0.join("params.ptnn")).unwrap();
    assert!(saved.as_slice().iter().zip(expected.as_slice()).all(|(a, b)| a.to_bits() == b.to_bits()));

    let lr0 = t.path().join("lr0");
    ok(&["train-pt", "--data", s(&data), "--epochs", "4", "--lr", "0", "--out", s(&lr0)]);
    let csv = fs::read_to_string(lr0.join("loss.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("step,train_mse,val_mse"));
    let rows: Vec<(f64, f64)> = lines
        .map(|l| {
            let f: Vec<f64> = l.split(',').map(|x| x.parse().unwrap()).collect();
            (f[1], f[2])
        })
        .collect();
    assert_eq!(rows.len(), 5);
    assert!(rows.iter().all(|r| *r == rows[0]), "{rows:?}");
    let summary = json(lr0.join("summary.json"));
    assert_eq!(summary["train_pairs"].as_u64().unwrap() % 2, 0);
}

#[test]
fn recognition_report_follows_its_schema() {
    let t = TempDir::new().unwrap();
    let out = t.path().join("rec");
    ok(&[
        "eval-recognition", "--oracle-predictor", "--shapes", "dissimilar5", "--episodes", "2", "--touches", "3",
        "--pooled-n", "4", "--pool-size", "6", "--repetitions", "3", "--out", s(&out),
    ]);
    let report = json(out.join("report.json"));
    validate_recognition_json(&report).unwrap();
    assert_eq!(report["objects"].as_array().unwrap().len(), 5);
    // Three modalities, five objects, two episodes of three touches.
    assert_eq!(fs::read_to_string(out.join("episodes.jsonl")).unwrap().lines().count(), 3 * 5 * 2 * 3);
    assert!(fs::read_to_string(out.join("table.txt")).unwrap().contains("P+T"));
}

#[test]
fn grasp_pipeline_reports_match_the_library() {
    let t = TempDir::new().unwrap();
    let gen = t.path().join("gen");
    ok(&["gen-data", "grasp", "--objects", "20", "--seed", "7", "--out", s(&gen)]);
    let summary = json(gen.join("summary.json"));
    assert_eq!(summary["records"], 200);
    assert_eq!(summary["label_balance"], 0.5);
    let data = gen.join("dataset.ptds");

    let model = t.path().join("model");
    ok(&["train-grasp", "--data", s(&data), "--epochs", "30", "--out", s(&model)]);
    let params_path = model.join("grasp.ptnn");

    let eval = t.path().join("eval");
    ok(&["eval-grasp", "--data", s(&data), "--params", s(&params_path), "--out", s(&eval)]);
    let report = json(eval.join("report.json"));
    validate_grasp_json(&report).unwrap();
    let c = &report["confusion"];
    let total: u64 = ["tp", "fp", "tn", "fn"].iter().map(|k| c[k].as_u64().unwrap()).sum();
    assert_eq!(total, report["n_test"].as_u64().unwrap());

    let ds = ptds::load_dataset(&data).unwrap();
    let Records::Grasp(records) = &ds.records else { panic!("grasp dataset") };
    let split = split_grasp(records, &SplitSpec::default()).unwrap();
    let expected = evaluate_grasp_accuracy(&ptnn::load_grasp_params(&params_path).unwrap(), &split.test).unwrap();
    assert_eq!(report["accuracy"].as_f64().unwrap(), expected);
    assert_eq!(total as usize, split.test.len());
    assert_eq!(json(model.join("summary.json"))["test_accuracy"].as_f64().unwrap(), expected);
}

#[test]
fn render_of_a_tilted_box_top_matches_the_plane_depth() {
    let t = TempDir::new().unwrap();
    let out = t.path().join("r");
    let th = 20f64.to_radians();
    let normal = format!("0,{},{}", th.sin(), th.cos());
    let shape = r#"{"kind":"box","size_x_mm":40,"size_y_mm":40,"size_z_mm":40,"resolution_mm":null}"#;
    ok(&["render", "--shape", shape, "--position", "0,0,50", "--normal", &normal, "--max-range", "20", "--out", s(&out)]);
    let raw = csv_grid(out.join("raw.csv"));
    assert_eq!(raw.len(), PATCH_SIZE);
    let half = (PATCH_SIZE / 2) as f64;
    for (r, row) in raw.iter().enumerate() {
        assert_eq!(row.len(), PATCH_SIZE);
        for cell in row {
            // Sensor y is (0, cos, −sin) and row r sits at v = r − 8 mm.
            let v = r as f64 - half;
            let expect = (10.0 - v * th.sin()) / th.cos();
            let got = cell.expect("box top fills the footprint");
            assert!((got - expect).abs() < 1e-5, "row {r}: {got} vs {expect}");
        }
    }
    let normalized = csv_grid(out.join("normalized.csv"));
    assert!(normalized.iter().flatten().all(|c| c.is_some_and(|x| (0.0..=1.0).contains(&x))));
    let inspect = ok(&["inspect", s(&out.join("raw.pgm"))]);
    let info: Value = serde_json::from_slice(&inspect.stdout).unwrap();
    assert_eq!(info["format"], "PGM");
}

#[test]
fn exit_codes_separate_usage_from_data_errors() {
    let t = TempDir::new().unwrap();
    let out = t.path().join("x");
    let o = s(&out);
    assert_eq!(code(&["frobnicate"]), 2);
    assert_eq!(code(&["gen-data", "touch", "--objects", "3", "--out", o]), 2);
    assert_eq!(code(&["render", "--shape", "no_such_shape", "--at", "0,0,40", "--out", o]), 2);
    assert_eq!(code(&["render", "--shape", "box", "--out", o]), 2);
    assert_eq!(code(&["--help"]), 0);

    assert_eq!(code(&["train-pt", "--data", s(&t.path().join("missing.ptds")), "--out", o]), 3);
    let data = touch_data(&t.path().join("data"), 12, 2);
    let mut bytes = fs::read(&data).unwrap();
    let mid = bytes.len() / 2;
    bytes[mid] ^= 0xff;
    let bad = t.path().join("bad.ptds");
    fs::write(&bad, &bytes).unwrap();
    assert_eq!(code(&["train-pt", "--data", s(&bad), "--out", o]), 3);
    assert_eq!(code(&["train-grasp", "--data", s(&data), "--out", o]), 3);
    assert_eq!(code(&["inspect", s(&bad)]), 3);
}
