//! End-to-end runs of the `oblig` binary.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use tempfile::TempDir;

fn oblig(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_oblig"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).expect("utf-8")
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).expect("utf-8")
}

fn fig3() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../core/examples/fig3.model.json")
}

fn s(p: &Path) -> &str {
    p.to_str().expect("utf-8 path")
}

/// Runs `reduce` for `formula`, returning the model and rules paths.
fn reduce(dir: &TempDir, formula: &str, extra: &[&str]) -> (PathBuf, PathBuf, Output) {
    let model = dir.path().join("m.json");
    let rules = dir.path().join("r.json");
    let mut args = vec!["reduce", "--formula", formula, "--out-model", s(&model), "--out-rules", s(&rules)];
    args.extend_from_slice(extra);
    let out = oblig(&args);
    (model, rules, out)
}

#[test]
fn enumerate_fig3_rows() {
    let out = oblig(&["enumerate", "--model", s(&fig3())]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    let execs: Vec<&str> = text.lines().map(|l| l.split(" | ").next().unwrap()).collect();
    assert_eq!(
        execs,
        [
            "(start,t1,t3,t4,end)",
            "(start,t2,t3,t4,end)",
            "(start,t3,t1,t4,end)",
            "(start,t3,t2,t4,end)",
        ]
    );
    assert!(text.lines().next().unwrap().ends_with("(end, {¬a, c, d}))"));
    let limited = oblig(&["enumerate", "--model", s(&fig3()), "--limit", "1"]);
    assert_eq!(stdout(&limited).lines().count(), 1);
}

#[test]
fn reduce_verify_tautology() {
    let dir = TempDir::new().unwrap();
    let (model, rules, out) = reduce(&dir, "a | !a", &["--verify"]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    assert!(stdout(&out).trim_end().ends_with("tautology: true, full compliance: true"));
    assert!(model.exists() && rules.exists());
}

#[test]
fn reduce_verify_non_tautology_still_passes_steps() {
    let dir = TempDir::new().unwrap();
    let (_, _, out) = reduce(&dir, "a & b", &["--verify"]);
    assert_eq!(out.status.code(), Some(0));
    assert!(stdout(&out).contains("tautology: false, full compliance: false"));
}

#[test]
fn check_full_on_single_atom_fails_with_witness() {
    let dir = TempDir::new().unwrap();
    let (model, rules, out) = reduce(&dir, "a", &[]);
    assert_eq!(out.status.code(), Some(0));
    let out = oblig(&["check", "--model", s(&model), "--rules", s(&rules), "--mode", "full"]);
    assert_eq!(out.status.code(), Some(1));
    let report: serde_json::Value = serde_json::from_str(stdout(&out).trim()).unwrap();
    assert_eq!(report["verdict"], false);
    assert!(report["witness"].is_object());
    assert!(stderr(&out).contains("a_neg"));

    // the empty start state already breaks `a`, so no trace complies
    let out = oblig(&["check", "--model", s(&model), "--rules", s(&rules), "--mode", "non", "--jobs", "2"]);
    assert_eq!(out.status.code(), Some(0));
}

#[test]
fn classify_prints_tag() {
    let dir = TempDir::new().unwrap();
    let (_, rules, _) = reduce(&dir, "a | b", &[]);
    let out = oblig(&["classify", "--rules", s(&rules)]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(stdout(&out).trim(), "1G+");
}

#[test]
fn fast_engine_rejects_other_variants() {
    let dir = TempDir::new().unwrap();
    let (model, rules, _) = reduce(&dir, "a | b", &[]);
    let out = oblig(&[
        "check", "--model", s(&model), "--rules", s(&rules), "--mode", "full", "--engine", "fast",
    ]);
    assert_eq!(out.status.code(), Some(2));
    let err: serde_json::Value = serde_json::from_str(stderr(&out).trim()).unwrap();
    assert_eq!(err["error"], "WrongVariant");
    assert_eq!(err["variant"], "1G+");
}

#[test]
fn errors_exit_two() {
    assert_eq!(oblig(&["check"]).status.code(), Some(2));
    assert_eq!(oblig(&["enumerate", "--model", "/nonexistent/m.json"]).status.code(), Some(2));
    let dir = TempDir::new().unwrap();
    let (_, _, out) = reduce(&dir, "a &", &[]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn bench_reduction_csv() {
    let dir = TempDir::new().unwrap();
    let csv = dir.path().join("b.csv");
    let out = oblig(&["bench", "--suite", "reduction", "--n-min", "4", "--n-max", "8", "--out", s(&csv)]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let text = std::fs::read_to_string(&csv).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("instance,engine,n,wall_ms,traces,verdict"));
    let traces: Vec<&str> = lines.map(|l| l.split(',').nth(4).unwrap()).collect();
    assert_eq!(traces, ["16", "32", "64", "128", "256"]);

    let empty = dir.path().join("e.csv");
    let out = oblig(&["bench", "--suite", "fastpath", "--n-min", "3", "--n-max", "2", "--out", s(&empty)]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(std::fs::read_to_string(&empty).unwrap().lines().count(), 1);
}
