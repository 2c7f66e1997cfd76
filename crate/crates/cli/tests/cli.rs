use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn scenario(n: usize) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join(format!("../../scenarios/scenario{n}.json"))
}

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_commsynth")).args(args).output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn solve_s3(out: &Path) {
    let o = run(&["--quiet", "solve", scenario(3).to_str().unwrap(), "--out", out.to_str().unwrap(), "--seed", "1"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(o.stderr.is_empty(), "--quiet still logged");
}

#[test]
fn value_prints_six_decimals() {
    let o = run(&["value", scenario(2).to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o).trim(), "v* = 1.000000");
}

#[test]
fn input_errors_exit_two() {
    let o = run(&["value", "/no/such/scenario.json"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("/no/such/scenario.json"));

    let dir = tempfile::tempdir().unwrap();
    let o = run(&["solve", scenario(3).to_str().unwrap(), "--threshold", "1.5", "--out", dir.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn threshold_above_optimum_exits_four() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&["--quiet", "solve", scenario(4).to_str().unwrap(), "--threshold", "0.99", "--restarts", "1", "--out", dir.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(4));
}

#[test]
fn solve_writes_round_tripping_report_and_consistent_heat_maps() {
    let dir = tempfile::tempdir().unwrap();
    solve_s3(dir.path());
    let text = std::fs::read_to_string(dir.path().join("report.json")).unwrap();
    let report: Value = serde_json::from_str(&text).unwrap();
    assert_eq!(serde_json::to_string_pretty(&report).unwrap(), text);
    assert!(report["dbar_value"].as_f64().unwrap() <= 1e-4);
    assert_eq!(report["bound_check"]["satisfied"], Value::Bool(true));

    let mut totals = Vec::new();
    for i in 0..3 {
        let csv = std::fs::read_to_string(dir.path().join(format!("occupancy_agent_{i}.csv"))).unwrap();
        let mut lines = csv.lines();
        assert_eq!(lines.next(), Some("state_id,occupancy"));
        let total: f64 = lines.map(|l| l.split(',').nth(1).unwrap().parse::<f64>().unwrap()).sum();
        totals.push(total);
    }
    for t in &totals {
        assert!((t - totals[0]).abs() <= 1e-8, "{totals:?}");
    }
}

#[test]
fn evaluate_and_simulate_a_solved_policy() {
    let dir = tempfile::tempdir().unwrap();
    solve_s3(dir.path());
    let policy = dir.path().join("policy.json");
    let (sc, pol) = (scenario(3), policy.to_str().unwrap().to_string());

    let o = run(&["evaluate", sc.to_str().unwrap(), &pol]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    assert!(text.contains("p_restricted = 1.000000"), "{text}");
    assert!(text.contains("satisfied = true"));

    let traj_a = dir.path().join("a.tsv");
    let traj_b = dir.path().join("b.tsv");
    for t in [&traj_a, &traj_b] {
        let o = run(&["simulate", sc.to_str().unwrap(), &pol, "--episodes", "200", "--seed", "5", "--trajectories", t.to_str().unwrap()]);
        assert_eq!(o.status.code(), Some(0));
        assert!(stdout(&o).contains("estimate = 1.000000"));
    }
    assert_eq!(std::fs::read(&traj_a).unwrap(), std::fs::read(&traj_b).unwrap());

    let o = run(&["simulate", sc.to_str().unwrap(), &pol, "--episodes", "0"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn mps_export_has_sections() {
    let dir = tempfile::tempdir().unwrap();
    let mps = dir.path().join("s2.mps");
    let o = run(&["--quiet", "solve", scenario(2).to_str().unwrap(), "--out", dir.path().to_str().unwrap(), "--mps", mps.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let text = std::fs::read_to_string(mps).unwrap();
    for section in ["NAME", "ROWS", "COLUMNS", "RHS", "ENDATA"] {
        assert!(text.lines().any(|l| l.starts_with(section)), "missing {section}");
    }
}
