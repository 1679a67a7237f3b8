//! End-to-end checks of the binary: generator/analyzer round trips, exit
//! codes, report schema stability, and CSV ingestion.

use std::io::Write;
use std::process::{Command, Output, Stdio};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_tanglekit"))
}

fn run_with_stdin(args: &[&str], stdin: &str) -> Output {
    let mut child = bin()
        .args(args)
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
        .expect("spawn tanglekit");
    child
        .stdin
        .as_mut()
        .unwrap()
        .write_all(stdin.as_bytes())
        .unwrap();
    child.wait_with_output().unwrap()
}

fn gen(args: &[&str]) -> String {
    let output = bin().args(args).output().unwrap();
    assert!(
        output.status.success(),
        "gen failed: {}",
        String::from_utf8_lossy(&output.stderr)
    );
    String::from_utf8(output.stdout).unwrap()
}

fn json_of(stdout: &[u8]) -> serde_json::Value {
    serde_json::from_slice(stdout).expect("stdout is one JSON document")
}

#[test]
fn every_generator_round_trips_through_consistency() {
    let cases: Vec<Vec<&str>> = vec![
        vec!["gen", "--example", "minorder", "--k", "1"],
        vec!["gen", "--example", "minorder", "--k", "2"],
        vec!["gen", "--example", "minorder", "--k", "3"],
        vec!["gen", "--example", "minorder", "--k", "4"],
        vec!["gen", "--example", "triples", "--k", "4"],
        vec!["gen", "--example", "triples", "--k", "5"],
        vec!["gen", "--example", "triples", "--k", "6"],
        vec!["gen", "--example", "arcs", "--n", "6"],
        vec!["gen", "--example", "arcs", "--n", "9"],
        vec!["gen", "--example", "arcs-witness", "--k", "5"],
        vec!["gen", "--example", "random", "--n", "8", "--m", "6", "--seed", "1"],
    ];
    for case in cases {
        let instance = gen(&case);
        let output = run_with_stdin(&["analyze", "-", "verify", "--check", "consistency"], &instance);
        assert!(
            output.status.success(),
            "{case:?}: {}",
            String::from_utf8_lossy(&output.stderr)
        );
        let report = json_of(&output.stdout);
        assert_eq!(report["results"]["holds"], serde_json::json!(true));
    }
}

#[test]
fn witness_sizes_through_the_pipe() {
    let instance = gen(&["gen", "--example", "triples", "--k", "4"]);
    let output = run_with_stdin(&["analyze", "-", "witness", "--algo", "exact"], &instance);
    assert!(output.status.success());
    let report = json_of(&output.stdout);
    assert_eq!(report["results"]["size"], serde_json::json!(4));
    assert_eq!(report["results"]["certified_minimal"], serde_json::json!(true));

    let m2 = gen(&["gen", "--example", "minorder", "--k", "2"]);
    for (algo, max_size) in [("exact", 4u64), ("greedy", 38), ("inductive", 38)] {
        let output = run_with_stdin(&["analyze", "-", "witness", "--algo", algo], &m2);
        assert!(output.status.success(), "{algo}");
        let report = json_of(&output.stdout);
        assert!(report["results"]["size"].as_u64().unwrap() <= max_size);
        assert_eq!(report["results"]["within_bound"], serde_json::json!(true));
    }
}

#[test]
fn corrupted_orientation_exits_two() {
    let instance = gen(&["gen", "--example", "minorder", "--k", "2"]);
    let mut parsed: serde_json::Value = serde_json::from_str(&instance).unwrap();
    let bits = parsed["orientation"].as_array().unwrap().clone();
    let flipped: Vec<serde_json::Value> = bits
        .iter()
        .map(|b| serde_json::json!(1 - b.as_u64().unwrap()))
        .collect();
    parsed["orientation"] = serde_json::json!(flipped);
    let output = run_with_stdin(
        &["analyze", "-", "verify", "--check", "consistency"],
        &parsed.to_string(),
    );
    assert_eq!(output.status.code(), Some(2));
    let report = json_of(&output.stdout);
    assert_eq!(report["results"]["holds"], serde_json::json!(false));
    assert!(report["results"]["violating_separations"].is_array());
}

#[test]
fn reports_are_stable_minus_wall_time() {
    let instance = gen(&["gen", "--example", "random", "--n", "8", "--m", "5", "--seed", "7"]);
    let run = || {
        let output = run_with_stdin(&["analyze", "-", "cover"], &instance);
        assert!(output.status.success());
        let mut report = json_of(&output.stdout);
        report.as_object_mut().unwrap().remove("wall_time_ms");
        report
    };
    let a = run();
    let b = run();
    assert_eq!(a, b);
    for key in ["command", "instance_digest", "parameters", "results"] {
        assert!(a.get(key).is_some(), "missing envelope key {key}");
    }
}

#[test]
fn guide_reports_use_rational_strings() {
    let instance = gen(&["gen", "--example", "triples", "--k", "6"]);
    let output = run_with_stdin(&["analyze", "-", "guide", "--max"], &instance);
    assert!(output.status.success());
    let report = json_of(&output.stdout);
    assert_eq!(report["results"]["rho"], serde_json::json!("1/2"));

    let output = run_with_stdin(&["analyze", "-", "guide", "--rho", "2/3"], &instance);
    assert!(output.status.success());
    let report = json_of(&output.stdout);
    assert_eq!(report["results"]["branch"], serde_json::json!("witness"));
    assert_eq!(report["results"]["verified"], serde_json::json!(true));
}

#[test]
fn guide_set_returns_the_designated_arcs() {
    let instance = gen(&["gen", "--example", "arcs", "--n", "6"]);
    let output = run_with_stdin(
        &[
            "analyze", "-", "guide-set", "--seed", "5", "--function", "indicator:G",
        ],
        &instance,
    );
    assert!(output.status.success());
    let report = json_of(&output.stdout);
    assert_eq!(report["results"]["trials"], serde_json::json!(1));
    let found: Vec<u64> = report["results"]["found"]
        .as_array()
        .unwrap()
        .iter()
        .map(|v| v.as_u64().unwrap())
        .collect();
    assert_eq!(found, (20..26).collect::<Vec<u64>>());
    assert_eq!(report["results"]["reliability"], serde_json::json!("2/3"));
}

#[test]
fn extend_emits_the_full_order() {
    let instance = gen(&["gen", "--example", "triples", "--k", "4"]);
    let output = run_with_stdin(&["analyze", "-", "extend"], &instance);
    assert!(output.status.success());
    let report = json_of(&output.stdout);
    assert_eq!(report["results"]["k"], serde_json::json!(4));
    assert_eq!(report["results"]["star_separations"], serde_json::json!(7));
    assert_eq!(report["results"]["sk_separations"], serde_json::json!(4));
    let star = &report["results"]["star_instance"];
    assert_eq!(star["separations"].as_array().unwrap().len(), 7);
}

#[test]
fn ingest_binary_csv_matches_the_triple_instance() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("t4.csv");
    std::fs::write(
        &path,
        "f1,f2,f3,f4\n1,1,1,0\n1,1,0,1\n1,0,1,1\n0,1,1,1\n",
    )
    .unwrap();
    let output = bin()
        .args(["ingest", path.to_str().unwrap()])
        .output()
        .unwrap();
    assert!(output.status.success());
    let mut instance = json_of(&output.stdout);
    assert_eq!(instance["ground_set_size"], serde_json::json!(4));
    assert_eq!(instance["separations"].as_array().unwrap().len(), 4);

    // Orienting every column toward its listed side gives the tangle whose
    // minimum witnessing set is the whole ground set.
    instance["orientation"] = serde_json::json!([1, 1, 1, 1]);
    let output = run_with_stdin(
        &["analyze", "-", "witness", "--algo", "exact"],
        &instance.to_string(),
    );
    assert!(output.status.success());
    let report = json_of(&output.stdout);
    assert_eq!(report["results"]["size"], serde_json::json!(4));
}

#[test]
fn ingest_skips_degenerate_columns_with_warning() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("deg.csv");
    std::fs::write(&path, "a,b\n1,1\n1,0\n0,1\n").unwrap();
    let output = bin()
        .args(["ingest", path.to_str().unwrap()])
        .output()
        .unwrap();
    assert!(output.status.success());
    let instance = json_of(&output.stdout);
    assert_eq!(instance["separations"].as_array().unwrap().len(), 2);

    let path2 = dir.path().join("allones.csv");
    std::fs::write(&path2, "a,b\n1,1\n1,0\n1,1\n").unwrap();
    let output = bin()
        .args(["ingest", path2.to_str().unwrap()])
        .output()
        .unwrap();
    assert!(output.status.success());
    let instance = json_of(&output.stdout);
    assert_eq!(instance["separations"].as_array().unwrap().len(), 1);
    assert!(String::from_utf8_lossy(&output.stderr).contains("degenerate"));
}

#[test]
fn ingest_median_threshold_and_order() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("num.csv");
    std::fs::write(&path, "x\n1.0\n2.0\n3.0\n10.0\n11.0\n12.0\n").unwrap();
    let output = bin()
        .args([
            "ingest",
            path.to_str().unwrap(),
            "--threshold",
            "median",
            "--order",
            "min-side",
        ])
        .output()
        .unwrap();
    assert!(output.status.success());
    let instance = json_of(&output.stdout);
    assert_eq!(instance["separations"][0]["side"], serde_json::json!([3, 4, 5]));
    assert_eq!(instance["separations"][0]["order"], serde_json::json!(3));
}

#[test]
fn parse_error_reports_row_and_column() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.csv");
    std::fs::write(&path, "a\n1\noops\n").unwrap();
    let output = bin()
        .args(["ingest", path.to_str().unwrap()])
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(1));
    let err = String::from_utf8_lossy(&output.stderr);
    assert!(err.contains("row 3"), "got {err}");
    assert!(err.contains("column 1"), "got {err}");
}

#[test]
fn usage_errors_exit_one() {
    let output = bin().args(["analyze"]).output().unwrap();
    assert_eq!(output.status.code(), Some(1));
    let output = bin()
        .args(["gen", "--example", "nonsense"])
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(1));
    let output = bin()
        .args(["--threads", "0", "gen", "--example", "triples", "--k", "4"])
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(1));
}

#[test]
fn threads_env_is_accepted() {
    let output = bin()
        .env("TANGLEKIT_THREADS", "4")
        .args(["gen", "--example", "triples", "--k", "4"])
        .output()
        .unwrap();
    assert!(output.status.success());
}
