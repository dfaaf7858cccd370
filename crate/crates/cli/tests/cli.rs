use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::Value;

fn fixtures() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../core/fixtures")
}

fn graph() -> String {
    fixtures().join("map.json").display().to_string()
}

fn query(name: &str) -> String {
    fixtures().join("queries").join(format!("{name}.opra")).display().to_string()
}

fn opra(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_opra")).args(args).output().expect("binary runs")
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| {
        panic!("stdout is not JSON ({e}): {}", String::from_utf8_lossy(&out.stdout))
    })
}

#[test]
fn eval_route_is_nonempty() {
    let out = opra(&["eval", "--graph", &graph(), "--query", &query("q_route")]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(json(&out)["empty"], false);
}

#[test]
fn eval_with_bindings_reports_witness() {
    let out = opra(&["eval", "--graph", &graph(), "--query", &query("sums"), "--bind", "s=S,t=P"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    let p = v["witness"][0].as_array().unwrap();
    assert_eq!(p.first().unwrap(), "S");
    assert_eq!(p.last().unwrap(), "P");
}

#[test]
fn eval_empty_exits_one() {
    let out = opra(&["eval", "--graph", &graph(), "--query", &query("t_walk_via_w")]);
    assert_eq!(out.status.code(), Some(1));
    assert_eq!(json(&out)["empty"], true);
}

#[test]
fn extremum_min_time() {
    let out = opra(&[
        "extremum", "--min", "--target", "time", "--graph", &graph(), "--query", &query("q_route_sp"),
    ]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert_eq!(v["value"], 80);
    assert_eq!(v["witness"][0], serde_json::json!(["S", "T", "P"]));
}

#[test]
fn extremum_max_attr_is_infinite() {
    let out = opra(&[
        "extremum", "--max", "--target", "attr[p]", "--graph", &graph(), "--query", &query("q_route_sp"),
    ]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(json(&out)["value"], "+inf");
}

#[test]
fn extremum_needs_direction() {
    let out = opra(&["extremum", "--target", "time", "--graph", &graph(), "--query", &query("q_route_sp")]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn check_reports_syntax_error() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("malformed.opra");
    std::fs::write(&bad, "MATCH PATHS (p WHERE").unwrap();
    let out = opra(&["check", "--query", bad.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("1:"), "{err}");
}

#[test]
fn check_validates_against_graph() {
    let dir = tempfile::tempdir().unwrap();
    let q = dir.path().join("speed.opra");
    std::fs::write(&q, "MATCH PATHS (p) HAVING speed[p] <= 3").unwrap();
    assert_eq!(opra(&["check", "--query", q.to_str().unwrap()]).status.code(), Some(0));
    let out = opra(&["check", "--query", q.to_str().unwrap(), "--graph", &graph()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("speed"));
}

#[test]
fn budget_exceeded_exits_three() {
    let out = opra(&["eval", "--graph", &graph(), "--query", &query("q_route"), "--visited-budget", "2"]);
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn unknown_binding_is_usage_error() {
    let out = opra(&["eval", "--graph", &graph(), "--query", &query("q_route"), "--bind", "s=Nowhere"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn oracle_answers_and_extremum() {
    let out = opra(&[
        "oracle", "--graph", &graph(), "--query", &query("q_route_sp"), "--max-path-len", "3",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let answers = json(&out)["answers"].as_array().unwrap().clone();
    assert!(answers.iter().any(|a| a["paths"]["p"] == serde_json::json!(["S", "T", "P"])));
    let out = opra(&[
        "oracle", "--graph", &graph(), "--query", &query("q_route_sp"), "--target", "attr", "--max",
    ]);
    assert_eq!(json(&out)["value"], 148);
}

#[test]
fn embed_writes_graph() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path().join("data.json");
    std::fs::write(
        &d,
        r#"{"nodes": ["u", "v"], "alphabet": ["a"], "dim": 1,
            "edges": [["u", "a", "v"]], "labels": {"u": [1], "v": [2]}}"#,
    )
    .unwrap();
    let out = opra(&["embed", "--data", d.to_str().unwrap(), "--pretty"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let v = json(&out);
    assert!(v["nodes"].as_array().unwrap().iter().any(|n| n == "sym:a"));
    assert!(v["labellings"].get("l2").is_some());
}

#[test]
fn corpus_matches_goldens_deterministically() {
    let a = opra(&["corpus"]);
    assert_eq!(a.status.code(), Some(0), "{}", String::from_utf8_lossy(&a.stdout));
    let b = opra(&["corpus"]);
    let strip = |o: &Output| {
        let mut v = json(o);
        v.as_object_mut().unwrap().remove("millis");
        v
    };
    assert_eq!(strip(&a), strip(&b));
}
