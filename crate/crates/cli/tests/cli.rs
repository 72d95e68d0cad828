use std::path::Path;
use std::process::Command;

fn massart() -> Command {
    Command::new(env!("CARGO_BIN_EXE_massart"))
}

fn run(args: &[&str]) -> (i32, String, String) {
    let out = massart().args(args).output().expect("spawn massart");
    (out.status.code().expect("exit code"), String::from_utf8_lossy(&out.stdout).into_owned(), String::from_utf8_lossy(&out.stderr).into_owned())
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p.display().to_string()
}

const SANDWICH: &str = r#"{"cells": [{"t": 0.0, "alpha": 0.4}], "verify": {"grid_size": 500, "tail_points_per_side": 10}, "plot_points": 300}"#;

const TESTER: &str = r#"{
  "generator": {"kind": "massart", "d": 3, "n": 1,
    "model": {"target": {"v": [0.6, 0.8, 0.0], "t": 0.3}, "eta_bound": 0.2, "eta_profile": {"kind": "constant", "rate": 0.2}}},
  "learner": {"kind": "oracle", "gamma": 0.3, "epsilon_prime": 0.0},
  "epsilon": 0.05, "delta": 0.1, "eta": 0.2, "gamma": 0.3,
  "overrides": {"l": 2, "N": 20000, "Delta_slice": 0.25, "tau_p": 0.03, "tau_m": 0.1, "psd_tol": 0.1, "min_count": 500},
  "opt_dirs": 20
}"#;

#[test]
fn sandwich_outputs_are_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "s.json", SANDWICH);
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    let (code, stdout, _) = run(&["sandwich", "--config", &cfg, "--out", a.to_str().unwrap()]);
    assert!(code == 0 || code == 1, "{code}");
    assert!(stdout.contains("cell-00"));
    run(&["sandwich", "--config", &cfg, "--out", b.to_str().unwrap()]);
    let csv = std::fs::read_to_string(a.join("cell-00.csv")).unwrap();
    assert_eq!(csv, std::fs::read_to_string(b.join("cell-00.csv")).unwrap());
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("x,h,p_minus,p_plus"));
    let first: Vec<f64> = lines.next().unwrap().split(',').map(|v| v.parse().unwrap()).collect();
    assert!(first[0] <= -10.0 && first[1] == 0.0 && first[2] <= 0.0, "{first:?}");
    assert_eq!(csv.lines().count(), 301);
    assert!(!csv.contains('\r'));

    let report: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(a.join("cell-00.json")).unwrap()).unwrap();
    for key in ["t", "alpha", "m", "k", "B", "w", "delta_bump", "degree", "gap_ratio", "max_violation", "pass"] {
        assert!(report.get(key).is_some(), "{key}");
    }
    assert_eq!(report["pointwise_pass"], true);
    // Exit status follows the per-cell pass flag.
    assert_eq!(code == 0, report["pass"] == true);

    // The resolved config reproduces everything.
    let c = dir.path().join("c");
    let resolved = a.join("resolved-config.json");
    run(&["sandwich", "--config", resolved.to_str().unwrap(), "--out", c.to_str().unwrap()]);
    for f in ["cell-00.csv", "cell-00.json", "summary.json"] {
        assert_eq!(std::fs::read(a.join(f)).unwrap(), std::fs::read(c.join(f)).unwrap(), "{f}");
    }
}

#[test]
fn config_errors_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("o");
    let bad = write(dir.path(), "bad.json", r#"{"cells": [], "colour": 1}"#);
    assert_eq!(run(&["sandwich", "--config", &bad, "--out", out.to_str().unwrap()]).0, 2);
    let tester = write(dir.path(), "t.json", TESTER);
    let (code, _, err) = run(&["tester", "--config", &tester, "--out", out.to_str().unwrap()]);
    assert_eq!(code, 2);
    assert!(err.contains("seed"), "{err}");
    assert_eq!(run(&["tester", "--seed", "1", "--out", out.to_str().unwrap()]).0, 2);
    assert_eq!(run(&["no-such-command"]).0, 2);
    let nested = write(dir.path(), "n.json", &TESTER.replace("\"opt_dirs\": 20", "\"opt_dirs\": 20, \"extra\": true"));
    assert_eq!(run(&["tester", "--config", &nested, "--seed", "1", "--out", out.to_str().unwrap()]).0, 2);
}

#[test]
fn tester_runs_are_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "t.json", TESTER);
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    let (code, stdout, err) = run(&["tester", "--config", &cfg, "--seed", "7", "--trials", "1", "--out", a.to_str().unwrap()]);
    assert!(code == 0 || code == 1, "{code} {err}");
    assert!(stdout.contains("accepted"));
    run(&["tester", "--config", &cfg, "--seed", "7", "--trials", "1", "--out", b.to_str().unwrap()]);
    for f in ["aggregate.json", "trial-000.json", "params.json"] {
        assert_eq!(std::fs::read(a.join(f)).unwrap(), std::fs::read(b.join(f)).unwrap(), "{f}");
    }
    let report: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(a.join("trial-000.json")).unwrap()).unwrap();
    assert_eq!(code == 0, report["verdict"] == "Accept");
    let agg: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(a.join("aggregate.json")).unwrap()).unwrap();
    for key in ["accept_rate", "mean_error", "opt_ref", "excess"] {
        assert!(agg.get(key).is_some(), "{key}");
    }
}

#[test]
fn suite_list_and_corrupted_tolerance() {
    let (code, stdout, _) = run(&["suite", "--list"]);
    assert_eq!(code, 0);
    assert_eq!(stdout.lines().count(), 10);
    assert!(stdout.contains("completeness"));

    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "suite.json", r#"{"only": [5], "completeness_overrides": {"tau_p": 0.0}}"#);
    let (code, stdout, _) = run(&["suite", "--config", &cfg, "--out", dir.path().join("o").to_str().unwrap()]);
    assert_eq!(code, 1, "{stdout}");
    assert!(stdout.contains("FAIL criterion  5"), "{stdout}");
    assert!(dir.path().join("o/criterion-05.json").exists());
}

#[test]
fn dataset_generate_and_export() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "d.json", &format!(r#"{{"generator": {}, "csv": true}}"#, r#"{"kind": "massart", "d": 2, "n": 100, "model": {"target": {"v": [1.0, 0.0], "t": 0.0}, "eta_bound": 0.1, "eta_profile": {"kind": "constant", "rate": 0.1}}}"#));
    let out = dir.path().join("gen");
    let (code, _, err) = run(&["dataset", "generate", "--config", &cfg, "--seed", "3", "--out", out.to_str().unwrap()]);
    assert_eq!(code, 0, "{err}");
    assert!(out.join("dataset.bin").exists() && out.join("dataset.json").exists() && out.join("resolved-config.json").exists());
    let exported = dir.path().join("exp");
    let (code, _, err) = run(&["dataset", "export", out.join("dataset.bin").to_str().unwrap(), "--out", exported.to_str().unwrap()]);
    assert_eq!(code, 0, "{err}");
    assert_eq!(std::fs::read(exported.join("dataset.csv")).unwrap(), std::fs::read(out.join("dataset.csv")).unwrap());
    assert_eq!(run(&["dataset", "export", dir.path().join("missing.bin").to_str().unwrap(), "--out", exported.to_str().unwrap()]).0, 2);
}
