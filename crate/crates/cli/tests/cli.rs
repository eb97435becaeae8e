use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_macdfs"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("spawn macdfs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn write(dir: &Path, name: &str, text: &str) -> PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p
}

fn json(o: &Output) -> Value {
    serde_json::from_slice(&o.stdout).unwrap_or_else(|e| panic!("{e}: {}", stdout(o)))
}

const Q2_CODE: &str =
    r#"{"d": 3, "noise": {"states": ["1/sqrt(2)(|02>+|10>)", "1/sqrt(2)(|01>+|20>)"]}, "code_dims": [2, 2]}"#;
const SWAP: &str =
    r#"{"d": 3, "noise": {"states": ["1/sqrt(2)(|01>-|10>)", "1/sqrt(2)(|12>-|21>)", "1/sqrt(2)(|02>-|20>)"]}}"#;

#[test]
fn examples_all_match() {
    let o = run(&["examples"]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    assert!(stdout(&o).contains("6/6 examples match"));
    let o = run(&["examples", "--format", "json"]);
    let v = json(&o);
    assert_eq!(v["matched"], 6);
    assert_eq!(v["total"], 6);
}

#[test]
fn analyze_reports_code_and_certificate_verifies() {
    let dir = TempDir::new().unwrap();
    let f = write(dir.path(), "q2.json", Q2_CODE);
    let o = run(&["analyze", f.to_str().unwrap(), "--format", "json"]);
    assert_eq!(o.status.code(), Some(0));
    let v = json(&o);
    assert_eq!(v["status"], "EXISTS");
    let plus = v["branches"]
        .as_array()
        .unwrap()
        .iter()
        .find(|b| b["lambda"][0] == 1.0)
        .unwrap();
    assert_eq!(plus["verdict"], "EXISTS");
    assert_eq!(plus["certificate"]["r"].as_array().unwrap().len(), 3);

    let rep = write(dir.path(), "rep.json", &stdout(&o));
    let o = run(&["verify", f.to_str().unwrap(), rep.to_str().unwrap(), "--format", "json"]);
    assert_eq!(o.status.code(), Some(0));
    let v = json(&o);
    assert_eq!(v["status"], "PASS", "{v}");
    assert!(v["channel_defect"].as_f64().unwrap() <= 1e-9);

    // Rotate the code slightly out of the eigenspace.
    let mut cert = plus["certificate"].clone();
    let (c, s) = (0.999f64.sqrt(), 0.001f64.sqrt());
    let r = cert["r"].as_array_mut().unwrap();
    let top = r[0][0][0].as_f64().unwrap();
    let mid = r[1][0][0].as_f64().unwrap();
    let low = r[2][0][0].as_f64().unwrap();
    let (a, b) = if mid.abs() > low.abs() { (mid, 1) } else { (low, 2) };
    r[0][0] = serde_json::json!([c * top + s * a, 0.0]);
    r[b][0] = serde_json::json!([c * a - s * top, 0.0]);
    let bad = write(dir.path(), "bad.json", &cert.to_string());
    let o = run(&["verify", f.to_str().unwrap(), bad.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("status: FAIL"), "{}", stdout(&o));
}

#[test]
fn swap_has_no_code_and_oracle_has_no_hit() {
    let dir = TempDir::new().unwrap();
    let f = write(dir.path(), "swap.json", SWAP);
    let o = run(&["analyze", f.to_str().unwrap(), "--quiet"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o).trim(), "status: NOT-EXISTS");

    let o = run(&["oracle", f.to_str().unwrap(), "--format", "json", "--lambda", "+1"]);
    assert_eq!(o.status.code(), Some(0));
    let v = json(&o);
    let b = &v["branches"][0];
    assert_eq!(b["found"], false);
    assert!(!b["curve"].as_array().unwrap().is_empty());
    assert!(b["min_objective"].as_f64().unwrap() > 1e-3);
}

#[test]
fn reports_are_deterministic() {
    let dir = TempDir::new().unwrap();
    let f = write(
        dir.path(),
        "rand.json",
        r#"{"d": 3, "noise": {"states": ["0.3|01> + (0.2,0.7)|12> - |20>", "|11> + 0.5|02>", "1/sqrt(5)(|00> + 2|22>)"]}, "seed": 11}"#,
    );
    let strip = |o: &Output| {
        let mut v = json(o);
        v.as_object_mut().unwrap().remove("timing_ms");
        v.to_string()
    };
    for cmd in ["analyze", "oracle"] {
        let a = run(&[cmd, f.to_str().unwrap(), "--format", "json", "--restarts", "16"]);
        let b = run(&[cmd, f.to_str().unwrap(), "--format", "json", "--restarts", "16"]);
        assert_eq!(a.status.code(), Some(0));
        assert_eq!(strip(&a), strip(&b));
    }
}

#[test]
fn flags_override_the_file() {
    let dir = TempDir::new().unwrap();
    let f = write(
        dir.path(),
        "nod.json",
        r#"{"noise": {"states": ["|00>", "|01>", "|10>", "|11>"]}}"#,
    );
    let o = run(&["analyze", f.to_str().unwrap(), "--format", "json"]);
    assert_eq!(o.status.code(), Some(2));
    let o = run(&[
        "analyze",
        f.to_str().unwrap(),
        "--dims",
        "3",
        "--code",
        "1x1",
        "--lambda",
        "-1",
        "--format",
        "json",
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let v = json(&o);
    assert_eq!(v["code"], serde_json::json!([1, 1]));
    assert_eq!(v["branches"].as_array().unwrap().len(), 1);
    assert_eq!(v["status"], "EXISTS");
}

#[test]
fn phased_and_multi_files() {
    let dir = TempDir::new().unwrap();
    let phased = write(
        dir.path(),
        "phased.json",
        r#"{"d": 3, "noise": {"phased": {"blocks": [
            {"delta": 0.4, "states": ["1/sqrt(2)(|02>+|10>)"]},
            {"delta": 1.9, "states": ["1/sqrt(2)(|01>+|20>)"]},
            {"delta": 3.0, "states": ["|00>"]}]}}, "p": 0.3}"#,
    );
    let o = run(&["analyze", phased.to_str().unwrap(), "--format", "json"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(json(&o)["status"], "EXISTS");

    let multi = write(
        dir.path(),
        "multi.json",
        r#"{"d": 3, "noise": {"multi": {
            "blocks": [["1/sqrt(2)(|02>+|10>)"], ["1/sqrt(2)(|01>+|20>)"]],
            "unitaries": [{"weight": 0.2, "phases": [0.5, 2.0]}, {"weight": 0.3, "phases": [1.0, -1.0]}]}}}"#,
    );
    let o = run(&["analyze", multi.to_str().unwrap(), "--format", "json"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let v = json(&o);
    assert_eq!(v["status"], "EXISTS");
    let rep = write(dir.path(), "rep.json", &stdout(&o));
    let o = run(&[
        "verify",
        multi.to_str().unwrap(),
        rep.to_str().unwrap(),
        "--format",
        "json",
    ]);
    let v = json(&o);
    assert_eq!(v["status"], "PASS", "{v}");
    assert_eq!(v["kl_residuals"].as_array().unwrap().len(), 3);
}

#[test]
fn input_errors_exit_with_two() {
    let dir = TempDir::new().unwrap();
    let cases = [
        ("garbage.json", "{ not json"),
        ("digit.json", r#"{"d": 3, "noise": {"states": ["|03>"]}}"#),
        ("syntax.json", r#"{"d": 3, "noise": {"states": ["|00> +"]}}"#),
        (
            "dims.json",
            r#"{"d": 3, "noise": {"states": ["|00>"]}, "code_dims": [4, 4]}"#,
        ),
        ("unitary.json", r#"{"d": 2, "noise": {"unitary": [[[1, 0]]]}}"#),
    ];
    for (name, text) in cases {
        let f = write(dir.path(), name, text);
        let o = run(&["analyze", f.to_str().unwrap()]);
        assert_eq!(o.status.code(), Some(2), "{name}");
        assert!(!o.stderr.is_empty());
    }
    assert_eq!(run(&["analyze", "/nonexistent/problem.json"]).status.code(), Some(2));
    assert_eq!(run(&["analyze"]).status.code(), Some(2));
    let f = write(dir.path(), "ok.json", Q2_CODE);
    assert_eq!(
        run(&["analyze", f.to_str().unwrap(), "--lambda", "7"]).status.code(),
        Some(2)
    );
    let bad = write(dir.path(), "cert.json", r#"{"lambda": [1, 0], "r": [[[1, 0]]]}"#);
    assert_eq!(
        run(&["verify", f.to_str().unwrap(), bad.to_str().unwrap()])
            .status
            .code(),
        Some(2)
    );
}

#[test]
fn explicit_unitary_matches_states() {
    let dir = TempDir::new().unwrap();
    // SWAP on C^3 ⊗ C^3.
    let mut rows = vec![vec![[0.0, 0.0]; 9]; 9];
    for k in 0..3 {
        for l in 0..3 {
            rows[k * 3 + l][l * 3 + k] = [1.0, 0.0];
        }
    }
    let text = serde_json::json!({"d": 3, "noise": {"unitary": rows}}).to_string();
    let f = write(dir.path(), "u.json", &text);
    let o = run(&["analyze", f.to_str().unwrap(), "--quiet"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o).trim(), "status: NOT-EXISTS");
}
