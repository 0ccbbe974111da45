use std::path::PathBuf;
use std::process::{Command, Output};

fn bin(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_arrfaces")).args(args).output().expect("binary runs")
}

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("arrfaces-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir.join(name)
}

fn json(out: &Output) -> serde_json::Value {
    serde_json::from_slice(&out.stdout).expect("report is JSON")
}

#[test]
fn generate_is_reproducible() {
    let a = bin(&["generate", "--kind", "random-lines", "--n", "12", "--m", "5", "--seed", "9"]);
    let b = bin(&["generate", "--kind", "random-lines", "--n", "12", "--m", "5", "--seed", "9"]);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    let c = bin(&["generate", "--kind", "random-lines", "--n", "12", "--m", "5", "--seed", "10"]);
    assert_ne!(a.stdout, c.stdout);
}

#[test]
fn bad_parameters_fail() {
    assert!(!bin(&["generate", "--kind", "grid-lines", "--n", "9"]).status.success());
    assert!(!bin(&["generate", "--kind", "random-points", "--m", "0"]).status.success());
}

#[test]
fn every_algorithm_verifies() {
    let inst = scratch("inst.txt");
    let path = inst.to_str().unwrap();
    assert!(bin(&["generate", "--kind", "random-lines", "--n", "25", "--m", "40", "--seed", "3", "--out", path])
        .status
        .success());
    let mut faces = None;
    for algo in ["many-faces-fast", "many-faces-main", "many-faces-naive"] {
        let out = bin(&["run", "--algo", algo, "--instance", path, "--verify", "--seed", "1"]);
        assert!(out.status.success(), "{algo}: {}", String::from_utf8_lossy(&out.stderr));
        let rep = json(&out);
        assert_eq!(rep["schema"], 1);
        assert_eq!(rep["verification"], "PASS");
        let f = rep["faces"].as_u64().unwrap();
        assert_eq!(*faces.get_or_insert(f), f, "{algo}");
    }
    for (algo, r) in [("face-query", "1"), ("face-query-tradeoff", "8")] {
        let out = bin(&["run", "--algo", algo, "--instance", path, "--r", r, "--verify"]);
        assert!(out.status.success(), "{algo}");
        assert_eq!(json(&out)["verified"], "40/40");
    }
}

#[test]
fn emitted_faces_use_exact_strings() {
    let inst = scratch("triangle.txt");
    std::fs::write(&inst, "L 0 0\nL 1 0\nL -1 2\nP 1 1/2\n").unwrap();
    let out = bin(&["run", "--algo", "many-faces-fast", "--instance", inst.to_str().unwrap(), "--emit-faces"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let rep = json(&out);
    assert_eq!(rep["verification"], "SKIPPED");
    let v = &rep["face_list"][0]["vertices"];
    assert_eq!(v.as_array().unwrap().len(), 3);
    assert!(v.as_array().unwrap().iter().any(|p| p[0] == "1" && p[1] == "1"));
}

#[test]
fn bench_reports_a_slope() {
    let out = bin(&["bench", "--algo", "many-faces-fast", "--n", "16,32,64", "--seed", "2"]);
    assert!(out.status.success());
    let rep = json(&out);
    assert_eq!(rep["runs"].as_array().unwrap().len(), 3);
    assert!(rep["time_slope"]["slope"].is_number());
}
