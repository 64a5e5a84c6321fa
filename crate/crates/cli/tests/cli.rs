use std::path::Path;
use std::process::{Command, Output};

fn pushcast(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_pushcast"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

#[test]
fn bounds_print_decimal() {
    let out = pushcast(&["bounds", "azuma", "--sum-c-sq", "100", "--x", "20"]);
    assert_eq!(out.status.code(), Some(0));
    let v: f64 = stdout(&out).trim().parse().unwrap();
    assert!((v - 2.0 * (-2.0f64).exp()).abs() < 1e-15);

    let out = pushcast(&["bounds", "chernoff", "--mean", "100", "--x", "30"]);
    let v: f64 = stdout(&out).trim().parse().unwrap();
    assert!((v - 0.033_448_045_976_940_88).abs() < 1e-15);

    let out = pushcast(&["bounds", "talagrand", "--median", "100", "--x", "50"]);
    assert_eq!(out.status.code(), Some(0));
}

#[test]
fn invalid_arguments_exit_one() {
    assert_eq!(pushcast(&["bounds", "azuma", "--sum-c-sq", "0", "--x", "1"]).status.code(), Some(1));
    assert_eq!(pushcast(&["simulate", "--n", "10"]).status.code(), Some(1));
    assert_eq!(pushcast(&["no-such-command"]).status.code(), Some(1));
    let out = pushcast(&[
        "simulate", "--n", "10", "--p", "0.5", "--complete", "--trials", "1", "--seed", "0",
        "--format", "json", "--out", "/dev/null",
    ]);
    assert_eq!(out.status.code(), Some(1));
    assert_eq!(pushcast(&["--help"]).status.code(), Some(0));
}

#[test]
fn oracle_topologies() {
    let out = pushcast(&["oracle", "--topology", "complete", "--n", "3"]);
    assert_eq!(out.status.code(), Some(0));
    let doc: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert!((doc["mean"].as_f64().unwrap() - 7.0 / 3.0).abs() < 1e-9);

    let out = pushcast(&["oracle", "--topology", "star", "--n", "4"]);
    let doc: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert!((doc["mean"].as_f64().unwrap() - 5.5).abs() < 1e-9);
}

#[test]
fn oracle_graph_file_and_disconnected_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    let connected = dir.path().join("tri.txt");
    std::fs::write(&connected, "3 3\n0 1\n0 2\n1 2\n").unwrap();
    let out = pushcast(&["oracle", "--graph-file", connected.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));

    let split = dir.path().join("split.txt");
    std::fs::write(&split, "4 2\n0 1\n2 3\n").unwrap();
    let out = pushcast(&["oracle", "--graph-file", split.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));

    let bad = dir.path().join("bad.txt");
    std::fs::write(&bad, "3 1\n1 1\n").unwrap();
    assert_eq!(pushcast(&["oracle", "--graph-file", bad.to_str().unwrap()]).status.code(), Some(1));
}

fn simulate(dir: &Path, extra: &[&str], format: &str, name: &str) -> (Output, std::path::PathBuf) {
    let path = dir.join(name);
    let mut args = vec!["simulate"];
    args.extend_from_slice(extra);
    args.extend_from_slice(&["--format", format, "--out", path.to_str().unwrap()]);
    (pushcast(&args), path)
}

#[test]
fn simulate_writes_reports() {
    let dir = tempfile::tempdir().unwrap();
    let base = ["--n", "300", "--alpha", "5", "--trials", "12", "--seed", "9"];
    let (out, json) = simulate(dir.path(), &base, "json", "r.json");
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let report = pushcast::harness::load_report(&json).unwrap();
    assert_eq!(report.trials.len(), 12);

    let (out, csv) = simulate(dir.path(), &base, "csv", "r.csv");
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(std::fs::read_to_string(&csv).unwrap().lines().count(), 13);

    let mut workers = base.to_vec();
    workers.extend_from_slice(&["--parallelism", "4"]);
    let (_, again) = simulate(dir.path(), &workers, "json", "r4.json");
    assert_eq!(std::fs::read(&json).unwrap(), std::fs::read(&again).unwrap());
}

#[test]
fn all_stalled_exits_two() {
    let dir = tempfile::tempdir().unwrap();
    // An edgeless-in-practice graph never broadcasts.
    let args = ["--n", "200", "--p", "1e-9", "--trials", "3", "--seed", "1"];
    let (out, path) = simulate(dir.path(), &args, "json", "s.json");
    assert_eq!(out.status.code(), Some(2));
    assert!(pushcast::harness::load_report(&path).unwrap().all_stalled);
}

#[test]
fn typicality_reports_json() {
    let out = pushcast(&["typicality", "--n", "2000", "--p", "0.05", "--seed", "3", "--samples", "5", "--epsilon", "0.3"]);
    assert_eq!(out.status.code(), Some(0));
    let doc: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(doc["all_passed"], true);
    assert!(doc["records"].as_array().unwrap().len() >= 2000);
}
