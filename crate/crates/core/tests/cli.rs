use std::fs;
use std::process::{Command, Output};

use oscilab::counterexample::{CounterexampleSpec, LinearSystem};

fn oscilab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_oscilab"))
        .args(args)
        .env_remove("OSCILAB_SEED")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn bound_prints_value() {
    let o = oscilab(&[
        "bound", "--n", "1", "--C", "1", "--alpha", "-1", "--beta", "1",
    ]);
    assert!(o.status.success());
    let v: f64 = stdout(&o).trim().parse().unwrap();
    assert!((v - 2.0 / std::f64::consts::LN_2).abs() < 1e-12);
}

#[test]
fn bound_below_one_is_usage_error() {
    let o = oscilab(&[
        "bound", "--n", "2", "--C", "0.5", "--alpha", "-1", "--beta", "1",
    ]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("C >= 1"));
}

#[test]
fn unknown_flag_is_usage_error() {
    assert_eq!(oscilab(&["demo", "--bogus"]).status.code(), Some(2));
    assert_eq!(oscilab(&["construct"]).status.code(), Some(2));
}

#[test]
fn construct_zero_nodes_is_rejected() {
    let o = oscilab(&["construct", "--d", "0"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("d must be >= 1"));
}

#[test]
fn construct_rejects_close_nodes_and_bad_margin() {
    assert_eq!(
        oscilab(&["construct", "--nodes", "0.1,0.1"]).status.code(),
        Some(2)
    );
    assert_eq!(
        oscilab(&["construct", "--d", "3", "--margin", "1.5"])
            .status
            .code(),
        Some(2)
    );
}

#[test]
fn construct_writes_reloadable_files() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let o = oscilab(&[
        "construct",
        "--d",
        "3",
        "--strategy",
        "chebyshev",
        "--out",
        out,
    ]);
    assert!(o.status.success());
    let spec_text = fs::read_to_string(dir.path().join("spec.json")).unwrap();
    let spec = CounterexampleSpec::from_json(&spec_text).unwrap();
    assert_eq!(spec.d(), 3);
    assert!(spec.norm_certificate.upper < 1.0);
    let written: serde_json::Value = serde_json::from_str(&spec_text).unwrap();
    let stored_upper = written["certificate"]["upper"].as_f64().unwrap();
    assert!((stored_upper - spec.norm_certificate.upper).abs() <= 1e-12);
    let system =
        LinearSystem::from_json(&fs::read_to_string(dir.path().join("system.json")).unwrap())
            .unwrap();
    assert_eq!(system.dim(), 2);
}

#[test]
fn construct_explicit_single_node() {
    let o = oscilab(&["construct", "--nodes", "0"]);
    assert!(o.status.success());
    let spec = CounterexampleSpec::from_json(&stdout(&o)).unwrap();
    assert!((spec.lambda - 0.4106736).abs() < 1e-6);
}

#[test]
fn count_spec_and_bare_system() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    assert!(oscilab(&["construct", "--d", "4", "--out", out])
        .status
        .success());
    let spec = dir.path().join("spec.json");
    let o = oscilab(&["count", spec.to_str().unwrap()]);
    assert!(o.status.success());
    let reports: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(reports[0]["component"], 1);
    assert_eq!(reports[0]["count"], 0);
    assert_eq!(reports[1]["component"], 2);
    assert_eq!(reports[1]["count"], 4);

    let system = dir.path().join("system.json");
    let csv = dir.path().join("traj.csv");
    assert_eq!(
        oscilab(&["count", system.to_str().unwrap()]).status.code(),
        Some(2)
    );
    let o = oscilab(&[
        "count",
        system.to_str().unwrap(),
        "--x0",
        "1,0",
        "--component",
        "1",
        "--out",
        csv.to_str().unwrap(),
    ]);
    assert!(o.status.success());
    let reports: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(reports.as_array().unwrap().len(), 1);
    assert_eq!(reports[0]["count"], 0);
    let traj = fs::read_to_string(csv).unwrap();
    assert!(traj.starts_with("t,x1,x2\n"));
    assert_eq!(traj.lines().count(), 1002);
}

#[test]
fn demo_csv_rows() {
    let o = oscilab(&["demo", "--d-max", "5"]);
    assert!(o.status.success());
    let text = stdout(&o);
    let zeros: Vec<&str> = text
        .lines()
        .skip(1)
        .map(|l| l.split(',').nth(3).unwrap())
        .collect();
    assert_eq!(zeros, ["1", "2", "3", "4", "5"]);
}

#[test]
fn stress_seed_from_environment() {
    let run = |seed: Option<&str>, args: &[&str]| {
        let mut c = Command::new(env!("CARGO_BIN_EXE_oscilab"));
        c.arg("stress").args(["--trials", "20"]).args(args);
        match seed {
            Some(s) => c.env("OSCILAB_SEED", s),
            None => c.env_remove("OSCILAB_SEED"),
        };
        let o = c.output().unwrap();
        assert!(o.status.success());
        serde_json::from_slice::<serde_json::Value>(&o.stdout).unwrap()
    };
    assert_eq!(run(Some("7"), &[])["seed"], 7);
    assert_eq!(run(Some("7"), &["--seed", "9"])["seed"], 9);
    assert_eq!(run(None, &[])["seed"], 42);
    assert_eq!(run(None, &["--n-max", "1"])["max_count"], 0);
}

#[test]
fn stress_rejects_order_out_of_range() {
    assert_eq!(oscilab(&["stress", "--n-max", "5"]).status.code(), Some(2));
}

#[test]
fn complex_single_node_and_monotone_delta() {
    let lambda = |delta: &str| {
        let o = oscilab(&["complex", "--d", "5", "--epsilon", "0.1", "--delta", delta]);
        assert!(o.status.success());
        let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
        assert_eq!(v["zeros_certified"], 5);
        v["lambda"].as_f64().unwrap()
    };
    assert!(lambda("0.5") > lambda("0.01"));
    let o = oscilab(&[
        "complex",
        "--nodes",
        "0",
        "--epsilon",
        "0.1",
        "--delta",
        "0.01",
    ]);
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert!((v["lambda"].as_f64().unwrap() - 0.0047386).abs() < 1e-6);
    assert_eq!(
        oscilab(&["complex", "--d", "2", "--epsilon", "0", "--delta", "0.5"])
            .status
            .code(),
        Some(2)
    );
}
