use std::process::{Command, Output};

use serde_json::Value;

fn ptchain(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ptchain")).args(args).env_remove("PTCHAIN_THREADS").output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

#[test]
fn classify_reports_json_and_exit_zero() {
    let o = ptchain(&["classify", "--family", "symmetrized", "-n", "4", "--squared", "4,3"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["class"], "RealDegenerate");
    assert_eq!(v["model"]["squaredCentralFirst"], serde_json::json!(["4", "3"]));
}

#[test]
fn spectrum_csv_has_header_and_one_row_per_level() {
    let o = ptchain(&["spectrum", "--family", "symmetrized", "-n", "5", "--squared", "1,1", "--format", "csv"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("re,im"));
    let rows: Vec<(f64, f64)> = lines
        .map(|l| {
            let (a, b) = l.split_once(',').unwrap();
            (a.parse().unwrap(), b.parse().unwrap())
        })
        .collect();
    assert_eq!(rows.len(), 5);
    assert!(rows.windows(2).all(|w| w[0].0 <= w[1].0));
}

#[test]
fn spectrum_json_parses() {
    let o = ptchain(&["spectrum", "--family", "general-pt", "--couplings", "1/2,1/3"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["model"]["N"], 3);
}

#[test]
fn every_bad_field_gets_its_own_line() {
    let o = ptchain(&["boundary", "--family", "symmetrized", "-n", "4", "--squared", "1.5,1", "--axes", "a,b", "--window", "3,1"]);
    assert_eq!(o.status.code(), Some(1));
    let err = stderr(&o);
    assert!(err.lines().count() >= 2, "{err}");
    assert!(err.lines().all(|l| l.starts_with("ptchain: ")), "{err}");
    assert!(stdout(&o).is_empty());
}

#[test]
fn inexact_input_is_rounded_and_reported() {
    let o = ptchain(&["classify", "--family", "symmetrized", "-n", "3", "--squared", "0.1", "--inexact"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert!(v["model"]["inexactRounding"].is_array());
}

#[test]
fn refusal_exits_one() {
    let o = ptchain(&["metric", "--family", "symmetrized", "-n", "3", "--squared", "2"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("refused"));
}

#[test]
fn eep_commands_succeed_and_out_of_range_is_usage() {
    let o = ptchain(&["eep-verify", "-n", "12"]);
    assert_eq!(o.status.code(), Some(0));
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["passed"], true);
    let o = ptchain(&["eep-eliminate", "-n", "5"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let o = ptchain(&["eep-eliminate", "-n", "12"]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn boundary_writes_csv_and_sidecar() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("edge.csv");
    let o = ptchain(&[
        "boundary", "--family", "symmetrized", "-n", "4", "--axes", "a,b", "--window", "0,3", "--window", "0,3",
        "--resolution", "24", "--out", out.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let csv = std::fs::read_to_string(&out).unwrap();
    assert_eq!(csv.lines().next(), Some("a,b"));
    let meta: Value = serde_json::from_str(&std::fs::read_to_string(dir.path().join("edge.meta.json")).unwrap()).unwrap();
    assert_eq!(meta["pointCount"].as_u64().unwrap() as usize, csv.lines().count() - 1);
    assert_eq!(meta["resolution"], 24);
}

#[test]
fn boundary_is_deterministic_across_thread_counts() {
    let args = ["boundary", "--family", "symmetrized", "-n", "5", "--axes", "a,b", "--window", "0,4", "--window", "0,4", "--resolution", "16"];
    let one = ptchain(&[&args[..], &["--threads", "1"]].concat());
    let two = ptchain(&[&args[..], &["--threads", "2"]].concat());
    assert_eq!(one.status.code(), Some(0), "{}", stderr(&one));
    assert_eq!(stdout(&one), stdout(&two));
    assert_eq!(stdout(&one), stdout(&ptchain(&[&args[..], &["--threads", "1"]].concat())));
}

#[test]
fn config_file_with_flag_override() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("job.json");
    std::fs::write(&cfg, r#"{"command": "classify", "family": "symmetrized", "N": 4, "squared": ["4", "3"]}"#).unwrap();
    let o = ptchain(&["classify", "--config", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert!(stdout(&o).contains("RealDegenerate"));
    let o = ptchain(&["classify", "--config", cfg.to_str().unwrap(), "--squared", "1,1"]);
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["class"], "RealSimple");

    std::fs::write(&cfg, r#"{"family": "symmetrized", "colour": 1}"#).unwrap();
    let o = ptchain(&["classify", "--config", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn version_flag() {
    let o = ptchain(&["--version"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains(env!("CARGO_PKG_VERSION")));
}
