use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn exshock(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_exshock")).args(args).output().expect("binary runs")
}

fn write(dir: &Path, name: &str, body: &str) -> PathBuf {
    let path = dir.join(name);
    fs::write(&path, body).unwrap();
    path
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn validate_reports_the_failing_shock_law() {
    let dir = tempfile::tempdir().unwrap();
    let mo = write(dir.path(), "mo.json", r#"{"name": "marshall_olkin", "params": {"a": [1, 0.9, 0.1]}, "d": 3}"#);
    let out = exshock(&["validate", "--family", s(&mo), "--condition", "iv"]);
    assert_eq!(out.status.code(), Some(1));
    let report: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(report["verdict"], "fail");
    let witnesses = report["witnesses"].as_array().unwrap();
    assert!(!witnesses.is_empty());
    assert!(witnesses.iter().all(|w| w["j"] == 3 && w["k"] == 0));

    let good = write(dir.path(), "good.json", r#"{"name": "marshall_olkin", "params": {"a": [1, 0.5, 0.25]}, "d": 3}"#);
    for condition in ["ii", "iii", "iv"] {
        let out = exshock(&["validate", "--family", s(&good), "--condition", condition]);
        assert_eq!(out.status.code(), Some(0), "condition {condition}");
    }
}

#[test]
fn frailty_samples_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let sato = write(dir.path(), "sato.json", r#"{"kind": "sato", "psi1": {"form": "log", "beta": 1, "eta": 1}, "H": 1}"#);
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    let base = ["sample", "--family", s(&sato), "--method", "frailty", "--n", "1000", "--seed", "7"];
    assert!(exshock(&[&base[..], &["--out", s(&a)]].concat()).status.success());
    assert!(exshock(&[&base[..], &["--out", s(&b), "--workers", "4"]].concat()).status.success());
    let bytes = fs::read(&a).unwrap();
    assert_eq!(bytes, fs::read(&b).unwrap());
    let text = String::from_utf8(bytes).unwrap();
    assert!(text.starts_with("u1,u2\r\n"));
    assert_eq!(text.lines().count(), 1001);

    let meta: Value = serde_json::from_str(&fs::read_to_string(dir.path().join("a.csv.meta.json")).unwrap()).unwrap();
    assert_eq!(meta["seed"], 7);
    assert_eq!(meta["method"], "frailty");
    assert_eq!(meta["family_hash"].as_str().unwrap().len(), 64);
    assert_eq!(fs::read(dir.path().join("a.csv.meta.json")).unwrap(), fs::read(dir.path().join("b.csv.meta.json")).unwrap());
}

#[test]
fn convert_independence_to_shock_laws_and_back() {
    let dir = tempfile::tempdir().unwrap();
    let indep = write(
        dir.path(),
        "indep3.json",
        r#"{"d": 3, "g": [{"kind": "identity"}, {"kind": "identity"}, {"kind": "identity"}]}"#,
    );
    let h_path = dir.path().join("h.json");
    assert!(exshock(&["convert", "--copula", s(&indep), "--to", "H", "--out", s(&h_path)]).status.success());
    let h: Value = serde_json::from_str(&fs::read_to_string(&h_path).unwrap()).unwrap();
    assert_eq!(h["H"][0]["kind"], "identity");
    for m in [1, 2] {
        assert_eq!(h["H"][m]["kind"], "constant");
        assert_eq!(h["H"][m]["params"]["value"], 1.0);
    }
    let out = exshock(&["convert", "--copula", s(&h_path), "--to", "g"]);
    assert!(out.status.success());
    let g: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert!(g["g"].as_array().unwrap().iter().all(|f| f["kind"] == "identity"));
}

#[test]
fn usage_errors_exit_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let mo = write(dir.path(), "mo.json", r#"{"name": "marshall_olkin", "params": {"a": [1, 0.5]}, "d": 2}"#);
    let bad = write(dir.path(), "bad.json", "{\"name\": \"marshall_olkin\",\n \"params\": ");
    let out = dir.path().join("x.csv");
    assert_eq!(exshock(&["sample", "--family", s(&mo), "--method", "frailty", "--out", s(&out)]).status.code(), Some(2));
    let parse = exshock(&["validate", "--family", s(&bad)]);
    assert_eq!(parse.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&parse.stderr).contains("line 2"));
    assert_eq!(exshock(&["validate"]).status.code(), Some(2));
    assert_eq!(exshock(&["validate", "--family", s(&mo), "--condition", "v"]).status.code(), Some(2));
}

#[test]
fn normalization_violation_fails_validation() {
    let dir = tempfile::tempdir().unwrap();
    let h = write(dir.path(), "h.json", r#"{"d": 2, "H": [{"kind": "identity"}, {"kind": "identity"}]}"#);
    let out = exshock(&["validate", "--copula", s(&h)]);
    assert_eq!(out.status.code(), Some(1));
    let report: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert!(report["witnesses"].as_array().unwrap().iter().any(|w| w["kind"] == "normalization"));
}

#[test]
fn diagnose_passes_on_a_valid_preset() {
    let dir = tempfile::tempdir().unwrap();
    let pwl = write(
        dir.path(),
        "pwl.json",
        r#"{"name": "piecewise_linear_bivariate", "params": {"a": 2, "b": 0.2, "c": 0.5}, "d": 2}"#,
    );
    let out = exshock(&["diagnose", "--family", s(&pwl), "--n", "200000", "--seed", "3"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stdout));
    let reports: Value = serde_json::from_slice(&out.stdout).unwrap();
    let tail = reports.as_array().unwrap().iter().find(|r| r["test"].as_str().unwrap().contains("lambda_L")).unwrap();
    assert_eq!(tail["analytic"], 0.2);
}
