//! End-to-end runs of the `robosync` binary.

use std::path::Path;
use std::process::{Command, Output};

fn robosync(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_robosync")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn simulate_to(out: &Path, seed: &str) -> Output {
    robosync(&[
        "simulate",
        "--kind",
        "sim-rs-a",
        "--n",
        "2",
        "--scheduler",
        "asynch-random",
        "--seed",
        seed,
        "--events",
        "200",
        "--p",
        "midpoint",
        "--out",
        out.to_str().unwrap(),
    ])
}

#[test]
fn simulate_writes_a_trace_and_a_verdict() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("trace.jsonl");
    let o = simulate_to(&out, "3");
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let verdict: serde_json::Value = serde_json::from_str(stdout(&o).trim()).unwrap();
    assert_eq!(verdict["pass"], true);
    assert_eq!(verdict["records"], 201);
    let trace = std::fs::read_to_string(&out).unwrap();
    assert_eq!(trace.lines().count(), 201);
    assert!(trace.starts_with(r#"{"step":0,"kind":"init","actors":[0,1],"op":"init""#));
}

#[test]
fn simulate_is_deterministic_per_seed() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b, c) = (dir.path().join("a"), dir.path().join("b"), dir.path().join("c"));
    simulate_to(&a, "11");
    simulate_to(&b, "11");
    simulate_to(&c, "12");
    let read = |p: &Path| std::fs::read(p).unwrap();
    assert_eq!(read(&a), read(&b));
    assert_ne!(read(&a), read(&c));
}

#[test]
fn validate_trace_agrees_with_simulate() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("trace.jsonl");
    let sim = robosync(&[
        "simulate",
        "--kind",
        "sim-rs-s",
        "--n",
        "3",
        "--seed",
        "7",
        "--rounds",
        "20",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(sim.status.code(), Some(0));
    let val = robosync(&["validate-trace", out.to_str().unwrap(), "--kind", "sim-rs-s"]);
    assert_eq!(val.status.code(), Some(0));
    assert_eq!(stdout(&sim), stdout(&val));
}

#[test]
fn validate_trace_rejects_garbage() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("bad.jsonl");
    std::fs::write(&out, "not json\n").unwrap();
    let o = robosync(&["validate-trace", out.to_str().unwrap(), "--kind", "sim-rs-s"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn impossibility_refutes_every_table() {
    let dir = tempfile::tempdir().unwrap();
    let report = dir.path().join("tables.jsonl");
    let o = robosync(&["check-impossibility", "--report", report.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    assert!(text.contains("256/256 refuted"), "{text}");
    assert!(text.contains("sim2-rs-a: no witness"), "{text}");
    assert_eq!(std::fs::read_to_string(&report).unwrap().lines().count(), 256);
}

#[test]
fn sync_conformance_passes() {
    let o = robosync(&["check-conformance", "--kind", "sim-rs-s", "--n", "3", "--diagram", "fig3"]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
}

#[test]
fn mutant_is_caught_with_a_counterexample() {
    let o = robosync(&["check-rsynch", "--kind", "sim2-rs-a", "--without", "S->T"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).contains("counterexample"));
}

#[test]
fn usage_errors_exit_with_two() {
    assert_eq!(robosync(&["simulate", "--kind", "bogus"]).status.code(), Some(2));
    assert_eq!(robosync(&["explore", "--kind", "sim-rs-a", "--n", "9"]).status.code(), Some(2));
    assert_eq!(robosync(&["explore", "--kind", "sim2-rs-a", "--n", "3"]).status.code(), Some(2));
    assert_eq!(robosync(&["check-rsynch", "--kind", "sim-rs-s", "--without", "nope"]).status.code(), Some(2));
}

#[test]
fn explore_writes_dot() {
    let dir = tempfile::tempdir().unwrap();
    let dot = dir.path().join("g.dot");
    let o = robosync(&["explore", "--kind", "sim-rs-s", "--n", "2", "--dot", dot.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let summary: serde_json::Value = serde_json::from_str(stdout(&o).trim()).unwrap();
    assert_eq!(summary["kind"], "sim-rs-s");
    assert!(summary["states"].as_u64().unwrap() > 0);
    let text = std::fs::read_to_string(&dot).unwrap();
    assert!(text.starts_with("digraph"));
    assert!(text.contains("(T,T)"));
}
