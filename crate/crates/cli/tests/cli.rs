use std::process::{Command, Output};

use serde_json::Value;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_heckesum")).args(args).output().expect("binary runs")
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("valid JSON")
}

#[test]
fn delta_json_has_truncation_fields() {
    let out = run(&["delta", "--k", "12", "--N", "1", "--m", "2", "--n", "1", "--tol", "1e-8"]);
    assert!(out.status.success());
    let v = json(&out);
    assert_eq!(v["schema"], "1");
    assert_eq!(v["converged"], true);
    assert!(v["tail_bound"].as_f64().unwrap() <= 1e-8);
    // Delta(2,1) = lambda(2) Delta(1,1) at level one
    let ratio = v["value"].as_f64().unwrap() / 2.840_287_375_167_5;
    assert!((ratio + 24.0 / 2f64.powf(5.5)).abs() < 1e-6);
}

#[test]
fn tau_is_csv_by_default() {
    let out = run(&["tau", "--max", "10"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "n,tau");
    assert_eq!(lines[2], "2,-24");
    assert_eq!(lines.len(), 11);
    let v = json(&run(&["tau", "--max", "3", "--format", "json"]));
    assert_eq!(v["values"][2]["tau"], "252");
}

#[test]
fn scalar_commands_print_decimal_text() {
    let out = run(&["kloosterman", "--m", "1", "--n", "1", "--c", "3"]);
    let v: f64 = String::from_utf8(out.stdout).unwrap().trim().parse().unwrap();
    assert!((v + 1.0).abs() < 1e-12);
    let out = run(&["besselj", "--nu", "1", "--x", "1.0"]);
    let v: f64 = String::from_utf8(out.stdout).unwrap().trim().parse().unwrap();
    assert!((v - 0.440_050_585_744_933_5).abs() < 1e-15);
}

#[test]
fn dimensions() {
    assert_eq!(json(&run(&["dim", "--k", "12", "--N", "1"]))["dim"], 1);
    assert_eq!(json(&run(&["newdim", "--k", "4", "--N", "11"]))["newdim"], 2);
}

#[test]
fn density_record() {
    let out = run(&["density", "--k", "12", "--N", "101", "--sigma", "1", "--u", "0.5"]);
    assert!(out.status.success());
    let v = json(&out);
    assert_eq!(v["E"], 1.5);
    assert_eq!(v["card"], 91);
    for key in ["value", "tail_bound", "converged"] {
        assert!(v["Pstar"].get(key).is_some());
    }
    assert!((v["rmt"]["Sp"].as_f64().unwrap() - 0.5).abs() < 1e-10);
    assert!((v["D1"].as_f64().unwrap() - 1.5).abs() < 0.2);
}

#[test]
fn rmt_sides_agree() {
    let v = json(&run(&["rmt", "--group", "O", "--sigma", "1"]));
    assert!((v["time_side"].as_f64().unwrap() - 1.5).abs() < 1e-6);
    assert!((v["fourier_side"].as_f64().unwrap() - 1.5).abs() < 1e-10);
}

#[test]
fn exit_codes() {
    assert_eq!(run(&["nonsense"]).status.code(), Some(1));
    assert_eq!(run(&["delta", "--k", "12"]).status.code(), Some(1));
    assert_eq!(run(&["delta", "--k", "13", "--N", "1", "--m", "1", "--n", "1"]).status.code(), Some(2));
    assert_eq!(run(&["puresum", "--k", "12", "--N", "6", "--n", "2"]).status.code(), Some(2));
    let capped = run(&["delta", "--k", "12", "--N", "1", "--m", "50", "--n", "50", "--tol", "1e-12", "--hard-cap", "10"]);
    assert_eq!(capped.status.code(), Some(3));
    assert_eq!(json(&capped)["converged"], false);
    assert_eq!(run(&["--help"]).status.code(), Some(0));
}

#[test]
fn config_file_and_override() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.cfg");
    std::fs::write(&cfg, "k = 16\nN = 1\n").unwrap();
    let v = json(&run(&["dim", "--config", cfg.to_str().unwrap()]));
    assert_eq!(v["k"], 16);
    let v = json(&run(&["dim", "--config", cfg.to_str().unwrap(), "--k", "24"]));
    assert_eq!(v["dim"], 2);
}

#[test]
fn manifest_and_reproducibility() {
    let dir = tempfile::tempdir().unwrap();
    let m = dir.path().join("manifest.json");
    let args = ["puresum", "--k", "12", "--N", "6", "--n", "5", "--threads", "1", "--manifest", m.to_str().unwrap()];
    let a = run(&args);
    let b = run(&args);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    let manifest: Value = serde_json::from_str(&std::fs::read_to_string(&m).unwrap()).unwrap();
    assert_eq!(manifest["schema"], "1");
    assert_eq!(manifest["threads"], 1);
    assert_eq!(manifest["arguments"][0], "puresum");
    assert!(manifest["result"]["tail_bound"].is_number());
}

#[test]
fn eigen_data_file() {
    let dir = tempfile::tempdir().unwrap();
    let f = dir.path().join("f.json");
    std::fs::write(&f, r#"{"k": 12, "M": 5, "lambda": {"2": 0.5, "3": -1.0}, "ramified_signs": {"5": -1}}"#).unwrap();
    let v = json(&run(&["basis", "--eigen-data", f.to_str().unwrap(), "--N", "20", "--n", "6"]));
    assert!((v["lambda_n"].as_f64().unwrap() + 0.5).abs() < 1e-15);
    let direct = v["xi_one_sum_direct"].as_f64().unwrap();
    let closed = v["xi_one_sum_closed"].as_f64().unwrap();
    assert!((direct - closed).abs() <= 1e-10 * closed.abs());
    std::fs::write(&f, r#"{"k": 12, "M": 5, "lambda": {"2": 2.5}}"#).unwrap();
    assert_eq!(run(&["basis", "--eigen-data", f.to_str().unwrap()]).status.code(), Some(2));
}

#[test]
fn density_grid_csv() {
    let dir = tempfile::tempdir().unwrap();
    let spec = dir.path().join("grid.cfg");
    std::fs::write(&spec, "k = 12\nsigma = 1\nu = 0.5\nN = 101, 103\n").unwrap();
    let out = run(&["density-grid", "--spec", spec.to_str().unwrap()]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let mut lines = text.lines();
    let header: Vec<&str> = lines.next().unwrap().split(',').collect();
    assert!(header.contains(&"D1") && header.contains(&"N"));
    assert_eq!(lines.count(), 2);
}
