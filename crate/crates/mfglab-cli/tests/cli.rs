//! End-to-end runs of the `mfglab` binary.

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn mfglab(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_mfglab")).current_dir(dir).args(args).output().expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exited normally")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn usage_errors_exit_with_two() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(code(&mfglab(dir.path(), &["frobnicate"])), 2);
    assert_eq!(code(&mfglab(dir.path(), &["solve", "no-such-game"])), 2);
    assert_eq!(code(&mfglab(dir.path(), &["experiment", "fh-gap", "--H", "8,x"])), 2);
    fs::write(dir.path().join("bad.game"), "states: a\nactions: x\nhorizon: 2\nmu0: 0.5\n").unwrap();
    assert_eq!(code(&mfglab(dir.path(), &["solve", "bad.game"])), 2);
}

#[test]
fn verdict_failures_exit_with_one() {
    let dir = tempfile::tempdir().unwrap();
    let o = mfglab(dir.path(), &["verify", "nash", "matching-pennies", "--row", "1,0", "--col", "1,0", "--eps", "0.5"]);
    assert_eq!(code(&o), 1);
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["row_regret"], 0.0);
    assert_eq!(v["col_regret"], 1.0);
    let o = mfglab(dir.path(), &["verify", "nash", "matching-pennies", "--row", "0.5,0.5", "--col", "0.5,0.5"]);
    assert_eq!(code(&o), 0);
    let o = mfglab(dir.path(), &["solve", "congestion-ring", "--iters", "2", "--tol", "1e-12"]);
    assert_eq!(code(&o), 1);
}

#[test]
fn solve_then_verify_a_shipped_game() {
    let dir = tempfile::tempdir().unwrap();
    let o =
        mfglab(dir.path(), &["solve", "congestion-ring", "--tol", "1e-3", "-o", "ring.sol", "--report", "rep.json"]);
    assert_eq!(code(&o), 0);
    let rep: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("rep.json")).unwrap()).unwrap();
    assert_eq!(rep["converged"], true);
    assert_eq!(code(&mfglab(dir.path(), &["verify", "solution", "congestion-ring", "ring.sol", "--tol", "1e-3"])), 0);
    assert_eq!(code(&mfglab(dir.path(), &["verify", "solution", "congestion-ring", "ring.sol", "--tol", "1e-9"])), 1);
}

#[test]
fn circuit_round_trip_through_files() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("c.txt"), "ASSIGN one = 1\nAFF h = 0.5*one\nCMP c = h < one\n").unwrap();
    assert_eq!(code(&mfglab(dir.path(), &["reduce", "gcircuit-statdist", "c.txt", "-o", "sd.game"])), 0);
    assert_eq!(code(&mfglab(dir.path(), &["solve", "sd.game", "--tol", "1e-10", "-o", "sd.sol"])), 0);
    let o = mfglab(dir.path(), &["reduce", "gcircuit-statdist", "c.txt", "--extract", "sd.sol", "-o", "p.txt"]);
    assert_eq!(code(&o), 0);
    assert_eq!(code(&mfglab(dir.path(), &["verify", "assignment", "c.txt", "p.txt", "--eps", "0.05"])), 0);

    assert_eq!(code(&mfglab(dir.path(), &["reduce", "gcircuit-fh2", "c.txt", "-o", "fh2.game"])), 0);
    assert_eq!(code(&mfglab(dir.path(), &["solve", "fh2.game", "--tol", "1e-4", "-o", "fh2.sol"])), 0);
    assert_eq!(
        code(&mfglab(dir.path(), &["reduce", "gcircuit-fh2", "c.txt", "--extract", "fh2.sol", "-o", "q.txt"])),
        0
    );
    assert_eq!(code(&mfglab(dir.path(), &["verify", "assignment", "c.txt", "q.txt", "--eps", "0.2"])), 0);
}

#[test]
fn bimatrix_round_trip_through_files() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("pd.txt"), "A: 0.6, 0; 1, 0.3\nB: 0.6, 1; 0, 0.3\n").unwrap();
    assert_eq!(code(&mfglab(dir.path(), &["reduce", "nash-fh2", "pd.txt", "-o", "pd.game"])), 0);
    assert_eq!(code(&mfglab(dir.path(), &["solve", "pd.game", "-o", "pd.sol"])), 0);
    let o = mfglab(dir.path(), &["reduce", "nash-fh2", "pd.txt", "--extract", "pd.sol"]);
    assert_eq!(stdout(&o), "row: 0.0, 1.0\ncol: 0.0, 1.0\n");
}

#[test]
fn counterexample_equilibrium_verifies() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(code(&mfglab(dir.path(), &["counterexample", "fh", "--H", "6", "-o", "g.game"])), 0);
    assert_eq!(code(&mfglab(dir.path(), &["counterexample", "fh", "--H", "6", "--policy", "ne", "-o", "ne.sol"])), 0);
    assert_eq!(code(&mfglab(dir.path(), &["verify", "solution", "g.game", "ne.sol", "--tol", "1e-8"])), 0);
    assert_eq!(code(&mfglab(dir.path(), &["counterexample", "stat", "--policy", "side-split"])), 2);
}

#[test]
fn experiments_are_reproducible_and_write_a_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let args = ["experiment", "divergence", "--N", "200", "--H", "6", "--episodes", "40", "--seed", "3"];
    for out in ["a", "b"] {
        let mut v = args.to_vec();
        v.extend(["--out", out]);
        assert_eq!(code(&mfglab(dir.path(), &v)), 0);
    }
    let a = fs::read(dir.path().join("a/divergence.csv")).unwrap();
    assert_eq!(a, fs::read(dir.path().join("b/divergence.csv")).unwrap());
    assert_eq!(String::from_utf8(a).unwrap().lines().count(), 7);
    let m: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("a/manifest.json")).unwrap()).unwrap();
    assert_eq!(m["experiment"], "divergence");
    assert_eq!(m["spec"]["Divergence"]["agents"], 200);
    assert!(m["git_describe"].as_str().is_some_and(|s| !s.is_empty()));
}

#[test]
fn anticoncentration_minimum_clears_one_twentieth() {
    let dir = tempfile::tempdir().unwrap();
    let o = mfglab(dir.path(), &["experiment", "anticoncentration", "--Nmax", "200", "--out", "ac"]);
    assert_eq!(code(&o), 0);
    let text = fs::read_to_string(dir.path().join("ac/anticoncentration.csv")).unwrap();
    let mut rows = csv::Reader::from_reader(text.as_bytes());
    let probs: Vec<f64> = rows.records().map(|r| r.unwrap()[2].parse().unwrap()).collect();
    assert_eq!(probs.len(), 200 * 11);
    assert!(probs.iter().all(|&p| p >= 0.05));
}

#[test]
fn nash_roundtrip_passes_on_matching_pennies() {
    let dir = tempfile::tempdir().unwrap();
    let o = mfglab(dir.path(), &["experiment", "nash-roundtrip", "--game", "matching-pennies", "--out", "nr"]);
    assert_eq!(code(&o), 0);
    assert!(stdout(&o).contains("PASS"));
    let m: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("nr/manifest.json")).unwrap()).unwrap();
    assert!(m["summary"]["row_regret"].as_f64().unwrap() <= 0.02);
    assert!(m["summary"]["col_regret"].as_f64().unwrap() <= 0.02);
}
