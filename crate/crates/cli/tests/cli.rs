use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::Value;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ffdioph"))
        .args(args)
        .env("FFDIOPH_WORKERS", "2")
        .output()
        .expect("binary runs")
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("json on stdout")
}

fn scratch(name: &str) -> PathBuf {
    let dir = PathBuf::from(env!("CARGO_TARGET_TMPDIR"));
    dir.join(format!("{}-{name}", std::process::id()))
}

#[test]
fn phi_sum_suite_passes() {
    let out = run(&["verify", "phi-sum", "--q", "2", "--lmax", "5"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert_eq!(v["cases"], 5);
    assert_eq!(v["pass"], true);
    assert!(v["results"][0].get("millis").is_none());
}

#[test]
fn unknown_suite_exits_with_two() {
    let out = run(&["verify", "unknown"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("unknown suite"));
}

#[test]
fn malformed_input_exits_with_two() {
    let out = run(&["best-approx", "--q", "2", "--d", "1", "--theta", "(x^2+", "--bound", "3"]);
    assert_eq!(out.status.code(), Some(2));
    let out = run(&["bounds", "--q", "6", "--d", "2", "--eps-grid", "1/4"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn certificate_round_trip() {
    let path = scratch("cert.json");
    let p = path.to_str().unwrap();
    let out = run(&["construct-di", "--q", "2", "--d", "2", "--eps", "1/4", "--N", "1", "--steps", "4", "--output", p]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let out = run(&["verify", "certificate", p]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert_eq!(v["checksum_matches"], true);
    assert_eq!(v["rebuild_identical"], true);

    // a tampered certificate is rejected
    let text = std::fs::read_to_string(&path).unwrap();
    let tampered = text.replacen("\"eps\": \"1/4\"", "\"eps\": \"1/8\"", 1);
    assert_ne!(text, tampered);
    std::fs::write(&path, tampered).unwrap();
    let out = run(&["verify", "certificate", p]);
    assert_eq!(out.status.code(), Some(1));
    std::fs::remove_file(&path).ok();
}

#[test]
fn bounds_table_has_one_row_per_eps() {
    let out = run(&["bounds", "--q", "2", "--d", "2", "--eps-grid", "2^-1..2^-10"]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    let mut lines = text.lines();
    assert!(lines.next().unwrap().starts_with("q,d,eps,base,lower,upper"));
    let rows: Vec<&str> = lines.collect();
    assert_eq!(rows.len(), 10);
    // outside the validity range of the lower bound the column is empty
    assert!(rows[0].starts_with("2,2,1/2,") && rows[0].contains(",,"));

    let out = run(&["bounds", "--q", "2", "--d", "2", "--eps-grid", "1/16", "--format", "json"]);
    let v = json(&out);
    assert!((v[0]["upper"].as_f64().unwrap() - 1.871568).abs() < 1e-5);
}

#[test]
fn best_approx_of_a_rational() {
    let out = run(&["best-approx", "--q", "2", "--d", "1", "--theta", "(x^2+1)/x^3", "--bound", "3"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    let entries = v["sequence"]["entries"].as_array().unwrap();
    assert_eq!(entries.len(), 4);
    assert_eq!(v["lattice_search_agrees"], true);
    assert_eq!(entries[3]["u"]["b"], serde_json::json!([0, 0, 0, 1]));
}

#[test]
fn reports_are_deterministic() {
    let args = ["verify", "minkowski", "--q", "2", "--d", "3", "--samples", "20", "--seed", "5"];
    let a = run(&args);
    let b = Command::new(env!("CARGO_BIN_EXE_ffdioph")).args(args).env("FFDIOPH_WORKERS", "1").output().unwrap();
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
    let c = run(&["verify", "minkowski", "--q", "2", "--d", "3", "--samples", "20", "--seed", "6"]);
    assert_ne!(a.stdout, c.stdout);
}

#[test]
fn enumerations_run() {
    let out = run(&["enumerate-lower", "--q", "2", "--d", "2", "--eps", "1/4", "--N", "1"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let out = run(&["enumerate-upper", "--q", "2", "--d", "2", "--eps", "1/16", "--cutoff", "2"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let out = run(&["construct-sing", "--q", "2", "--d", "2", "--start", "9", "--levels", "2"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
}
