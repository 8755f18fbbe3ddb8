use std::path::Path;
use std::process::{Command, Output};

use emergence_lab::ingest::emit_jsonl;
use emergence_lab::sim::{self, SimConfig};

fn lab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_emergence-lab"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn short_world(dir: &Path) -> String {
    let cfg = SimConfig {
        seed: 5,
        steps: 30,
        ..SimConfig::preset("subcritical").unwrap()
    };
    let path = dir.join("events.jsonl");
    std::fs::write(&path, emit_jsonl(&sim::run(&cfg).log)).unwrap();
    path.to_str().unwrap().to_string()
}

#[test]
fn simulate_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let out = |name: &str| dir.path().join(name).to_str().unwrap().to_string();
    for name in ["a.jsonl", "b.jsonl"] {
        let o = lab(&[
            "simulate",
            "--preset",
            "null-world",
            "--seed",
            "4",
            "--out",
            &out(name),
        ]);
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    }
    let a = std::fs::read(out("a.jsonl")).unwrap();
    assert!(!a.is_empty());
    assert_eq!(a, std::fs::read(out("b.jsonl")).unwrap());
}

#[test]
fn usage_errors_exit_2() {
    assert_eq!(lab(&["simulate", "--out", "/tmp/x.jsonl"]).status.code(), Some(2));
    assert_eq!(
        lab(&["simulate", "--preset", "nope", "--out", "/tmp/x.jsonl"])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(lab(&["frobnicate"]).status.code(), Some(2));
    assert_eq!(lab(&["--help"]).status.code(), Some(0));
}

#[test]
fn unwritable_output_exits_3() {
    let o = lab(&[
        "simulate",
        "--preset",
        "null-world",
        "--out",
        "/nonexistent/dir/x.jsonl",
    ]);
    assert_eq!(o.status.code(), Some(3));
}

#[test]
fn malformed_line_is_named() {
    let dir = tempfile::tempdir().unwrap();
    let src = short_world(dir.path());
    let mut lines: Vec<String> = std::fs::read_to_string(&src)
        .unwrap()
        .lines()
        .map(String::from)
        .collect();
    assert!(lines.len() > 20);
    lines[16] = "{\"commit_id\": \"x\", \"timestamp\": ".into();
    let bad = dir.path().join("bad.jsonl");
    std::fs::write(&bad, lines.join("\n")).unwrap();
    let out = dir.path().join("o.jsonl");
    let o = lab(&[
        "ingest",
        "jsonl",
        "--log",
        bad.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("line 17"));
}

#[test]
fn conflicting_ci_exits_4() {
    let dir = tempfile::tempdir().unwrap();
    let src = short_world(dir.path());
    let first = std::fs::read_to_string(&src).unwrap();
    let id: serde_json::Value = serde_json::from_str(first.lines().next().unwrap()).unwrap();
    let id = id["commit_id"].as_str().unwrap();
    let ci = dir.path().join("ci.jsonl");
    std::fs::write(
        &ci,
        format!("{{\"commit_id\":\"{id}\",\"passed\":true}}\n{{\"commit_id\":\"{id}\",\"passed\":false}}\n"),
    )
    .unwrap();
    let out = dir.path().join("o.jsonl");
    let o = lab(&[
        "ingest",
        "jsonl",
        "--log",
        &src,
        "--ci",
        ci.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(4), "{}", String::from_utf8_lossy(&o.stderr));
}

#[test]
fn measure_then_ei() {
    let dir = tempfile::tempdir().unwrap();
    let src = short_world(dir.path());
    let series = dir.path().join("series.csv");
    let cascades = dir.path().join("cascades.csv");
    let o = lab(&[
        "measure",
        "--events",
        &src,
        "--out-series",
        series.to_str().unwrap(),
        "--out-cascades",
        cascades.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let rows = std::fs::read_to_string(&series).unwrap().lines().count();
    assert_eq!(rows, 31, "header plus one row per window");

    let report = dir.path().join("ei.json");
    let o = lab(&[
        "ei",
        "--series",
        series.to_str().unwrap(),
        "--bootstrap",
        "50",
        "--out",
        report.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let v: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&report).unwrap()).unwrap();
    assert!(v["result"]["ce"].is_number());

    let o = lab(&["ei", "--series", series.to_str().unwrap(), "--bins", "1"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn single_log_cannot_fit_rate_scaling() {
    let dir = tempfile::tempdir().unwrap();
    let src = short_world(dir.path());
    let o = lab(&["test-propositions", "--events", &src, "--propositions", "p4"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("agent levels"));
}
