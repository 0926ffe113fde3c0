use std::fs;
use std::io::Write;
use std::path::Path;
use std::process::{Command, Output, Stdio};

use serde_json::Value;

fn natp(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_natp"))
        .args(args)
        .output()
        .expect("run natp")
}

fn natp_stdin(args: &[&str], input: &[u8]) -> Output {
    let mut child = Command::new(env!("CARGO_BIN_EXE_natp"))
        .args(args)
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
        .expect("run natp");
    child.stdin.take().unwrap().write_all(input).unwrap();
    child.wait_with_output().unwrap()
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| {
        panic!(
            "bad json ({e}): {}\n{}",
            String::from_utf8_lossy(&out.stdout),
            String::from_utf8_lossy(&out.stderr)
        )
    })
}

fn write(dir: &Path, name: &str, text: &[u8]) -> String {
    let path = dir.join(name);
    fs::write(&path, text).unwrap();
    path.to_str().unwrap().to_string()
}

const TRIANGLE: &str = r#"{
    "field": {"kind": "real"},
    "points": ["a", "b", "c"],
    "metric": {"type": "matrix", "values": [["0", "1", "3"], ["1", "0", "1"], ["3", "1", "0"]]},
    "vector": [{"point": "a", "coeff": "1"}, {"point": "c", "coeff": "-1"}]
}"#;

#[test]
fn gen_norm_certify_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    for field in ["trivial", "p-adic:2", "p-adic:3", "finite:5", "levi-civita"] {
        let inst = natp(&["gen", "--points", "6", "--scales", "3", "--seed", "11", "--field", field]);
        assert!(inst.status.success(), "{field}");
        let inst_path = write(dir.path(), "inst.json", &inst.stdout);

        let cert = natp(&["norm", "--instance", &inst_path]);
        assert!(cert.status.success(), "{field}: {}", String::from_utf8_lossy(&cert.stderr));
        let cert_json = json(&cert);
        assert!(cert_json["value"]["mantissa"].is_string());

        let ok = natp_stdin(&["certify", "--instance", &inst_path], &cert.stdout);
        assert!(ok.status.success(), "{field}: {}", String::from_utf8_lossy(&ok.stdout));
        assert_eq!(json(&ok)["passed"], Value::Bool(true));
    }
}

#[test]
fn tampered_certificate_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let inst = natp(&["gen", "--points", "5", "--seed", "4", "--field", "p-adic:3"]);
    let inst_path = write(dir.path(), "inst.json", &inst.stdout);
    let mut cert = json(&natp(&["norm", "--instance", &inst_path]));
    cert["value"]["mantissa"] = Value::String("1000/1".into());
    let cert_path = write(dir.path(), "cert.json", cert.to_string().as_bytes());

    let out = natp(&["certify", "--instance", &inst_path, "--certificate", &cert_path]);
    assert_eq!(out.status.code(), Some(1));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("\"passed\": false"), "{err}");
    assert!(err.contains("certificate rejected"), "{err}");
}

#[test]
fn gen_is_deterministic() {
    let a = natp(&["gen", "--seed", "9", "--field", "levi-civita"]);
    let b = natp(&["gen", "--seed", "9", "--field", "levi-civita"]);
    let c = natp(&["gen", "--seed", "10", "--field", "levi-civita"]);
    assert_eq!(a.stdout, b.stdout);
    assert_ne!(a.stdout, c.stdout);
}

#[test]
fn invalid_instance_exits_one() {
    let dir = tempfile::tempdir().unwrap();
    let path = write(dir.path(), "bad.json", b"{ \"field\": {\"kind\": \"p-adic\", \"p\": 4} }");
    let out = natp(&["norm", "--instance", &path]);
    assert_eq!(out.status.code(), Some(1));
    assert!(!out.stderr.is_empty());

    let missing = natp(&["norm", "--instance", "/nonexistent/instance.json"]);
    assert_eq!(missing.status.code(), Some(1));

    let usage = natp(&["norm"]);
    assert_eq!(usage.status.code(), Some(1));
}

#[test]
fn real_triangle_violation_is_reported() {
    let dir = tempfile::tempdir().unwrap();
    let path = write(dir.path(), "tri.json", TRIANGLE.as_bytes());
    let out = natp(&["classical", "--instance", &path]);
    assert_eq!(out.status.code(), Some(1));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("triangle inequality fails"), "{err}");
}

#[test]
fn classical_real_value_is_exact() {
    let dir = tempfile::tempdir().unwrap();
    let fixed = TRIANGLE.replace(r#""3"], ["1", "0", "1"], ["3""#, r#""2"], ["1", "0", "1"], ["2""#);
    let path = write(dir.path(), "ok.json", fixed.as_bytes());
    let out = natp(&["classical", "--instance", &path]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let v = json(&out);
    assert_eq!(v["value"], "2/1");
    assert_eq!(v["bipartite"], "2/1");
}

#[test]
fn directory_batch_matches_single_runs() {
    let dir = tempfile::tempdir().unwrap();
    for seed in 0..4 {
        let inst = natp(&["gen", "--seed", &seed.to_string(), "--field", "finite:5"]);
        write(dir.path(), &format!("i{seed}.json"), &inst.stdout);
    }
    let dir_str = dir.path().to_str().unwrap();
    let serial = natp(&["norm", "--instance", dir_str]);
    let parallel = natp(&["norm", "--instance", dir_str, "--parallel"]);
    assert!(serial.status.success());
    assert_eq!(serial.stdout, parallel.stdout);
}

#[test]
fn oracle_agrees_on_generated_instance() {
    let dir = tempfile::tempdir().unwrap();
    let inst = natp(&["gen", "--points", "4", "--seed", "2", "--field", "p-adic:2"]);
    let path = write(dir.path(), "inst.json", &inst.stdout);
    let out = natp(&["oracle", "--instance", &path, "--budget", "2"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn appendix_reports_both_values() {
    let v = json(&natp(&["appendix"]));
    let sr = v["support_restricted"].as_f64().unwrap();
    let full = v["full"].as_f64().unwrap();
    assert!((sr - 3f64.sqrt()).abs() < 1e-6);
    assert!((full - 1.5).abs() < 1e-6);
}
