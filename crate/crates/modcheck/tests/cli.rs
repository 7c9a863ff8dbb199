use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::Value;

fn corpus(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("corpus").join(name)
}

fn modcheck(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_modcheck"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

const VEND_REACH: &str = "[[env]] G <<sys,env>> F p";

#[test]
fn holds_exits_zero() {
    let model = corpus("counter.cgs");
    let out = modcheck(&["check", model.to_str().unwrap(), "<<sys>> F p"]);
    assert_eq!(out.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&out.stdout).starts_with("holds"));
}

#[test]
fn vend_fails_with_the_q_pruning() {
    let model = corpus("g_vend.cgs");
    let out = modcheck(&["check", model.to_str().unwrap(), VEND_REACH, "--json"]);
    assert_eq!(out.status.code(), Some(1));
    let report = json(&out);
    assert_eq!(report["verdict"], "fails");
    assert_eq!(report["engine"], "atl");
    assert_eq!(report["witness"]["validated"], true);
    assert_eq!(report["witness"]["pruning"], serde_json::json!({"s0": ["sq"]}));
    assert!(report.get("timings_ms").is_none());
}

#[test]
fn json_is_deterministic_without_timings() {
    let model = corpus("relay.cgs");
    let args = [
        "check",
        model.to_str().unwrap(),
        "[[env]] G <<sys,env>> F p",
        "--json",
        "--engine",
        "atlstar",
    ];
    let a = modcheck(&args);
    let b = modcheck(&args);
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn timings_are_opt_in() {
    let model = corpus("g_vend.cgs");
    let out = modcheck(&["check", model.to_str().unwrap(), VEND_REACH, "--json", "--timings"]);
    let report = json(&out);
    let times = report["timings_ms"].as_object().expect("timings present");
    for stage in ["acg", "nta", "game", "validate"] {
        assert!(times.contains_key(stage), "{stage}");
    }
}

#[test]
fn counterexample_is_written_as_dot() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("witness.dot");
    let model = corpus("g_vend.cgs");
    let out = modcheck(&[
        "check",
        model.to_str().unwrap(),
        VEND_REACH,
        "--counterexample",
        path.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(1));
    let dot = std::fs::read_to_string(&path).unwrap();
    assert!(dot.starts_with("digraph witness {"));
    // The pruned move to sp is drawn dashed.
    assert!(dot.contains("[label=\"sp\", style=dashed]"));
}

#[test]
fn usage_errors_exit_two() {
    let model = corpus("g_vend.cgs");
    let out = modcheck(&["check", model.to_str().unwrap(), "<<nobody>> F p"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("error"));

    let dir = tempfile::tempdir().unwrap();
    let missing = dir.path().join("missing.cgs");
    let out = modcheck(&["check", missing.to_str().unwrap(), "p"]);
    assert_eq!(out.status.code(), Some(2));

    let bad = dir.path().join("bad.cgs");
    std::fs::write(&bad, "agents: sys\n").unwrap();
    let out = modcheck(&["check", bad.to_str().unwrap(), "p"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn exceeded_caps_exit_three() {
    let model = corpus("g_vend.cgs");
    let out = modcheck(&[
        "check",
        model.to_str().unwrap(),
        "<<sys>> G F p",
        "--json",
        "--max-nta-states",
        "1",
    ]);
    assert_eq!(out.status.code(), Some(3));
    let report = json(&out);
    assert_eq!(report["verdict"], "resource-exceeded");
    assert_eq!(report["cap_hit"], "nta");
    assert_eq!(report["caps"]["max_nta_states"], 1);
}

#[test]
fn oracle_reports_the_first_violating_pruning() {
    let model = corpus("g_vend.cgs");
    let out = modcheck(&["oracle", model.to_str().unwrap(), VEND_REACH]);
    assert_eq!(out.status.code(), Some(1));
    let report = json(&out);
    assert_eq!(report["verdict"], "violation");
    assert_eq!(report["pruning"], serde_json::json!({"s0": ["sq"]}));
}

#[test]
fn every_dump_stage_prints() {
    let model = corpus("g_vend.cgs");
    for (stage, marker) in [
        ("acg", ""),
        ("nbw", "HOA: v1"),
        ("dpw", "HOA: v1"),
        ("nta", "nta:"),
        ("game", "parity"),
    ] {
        let out = modcheck(&["dump", model.to_str().unwrap(), "<<sys>> G F p", "--stage", stage]);
        assert_eq!(out.status.code(), Some(0), "{stage}");
        let text = String::from_utf8_lossy(&out.stdout);
        assert!(!text.is_empty() && text.contains(marker), "{stage}: {text}");
    }
}
