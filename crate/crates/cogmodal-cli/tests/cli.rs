//! End-to-end tests of the binary: exit codes, output shapes, the JSON
//! mode, file outputs and the budget guard.

use std::path::PathBuf;
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_cogmodal"))
}

fn fixture(name: &str) -> String {
    let mut p = PathBuf::from(concat!(env!("CARGO_MANIFEST_DIR"), "/../../fixtures"));
    p.push(name);
    p.display().to_string()
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).expect("utf8 stdout")
}

fn stderr(out: &Output) -> String {
    String::from_utf8(out.stderr.clone()).expect("utf8 stderr")
}

fn json_lines(out: &Output) -> Vec<serde_json::Value> {
    stdout(out)
        .lines()
        .map(|l| serde_json::from_str(l).unwrap_or_else(|e| panic!("bad JSON line `{l}`: {e}")))
        .collect()
}

/// Two agents, single shared information cell, each desiring the opposite
/// matching pattern: no profile is an equilibrium in either mode.
const MATCHING_PENNIES: &str = r#"{
  "version": 1,
  "agents": ["1", "2"],
  "atoms": ["m"],
  "actions": ["a", "b"],
  "worlds": [
    {"id": "w1", "nominals": ["w1"], "atoms": ["m"],
     "agents": {"1": {"cell": "c0", "rank_p": 0, "rank_d": 1, "choice": "a"},
                "2": {"cell": "c0", "rank_p": 0, "rank_d": 0, "choice": "a"}}},
    {"id": "w2", "nominals": ["w2"], "atoms": [],
     "agents": {"1": {"cell": "c0", "rank_p": 0, "rank_d": 0, "choice": "a"},
                "2": {"cell": "c0", "rank_p": 0, "rank_d": 1, "choice": "b"}}},
    {"id": "w3", "nominals": ["w3"], "atoms": [],
     "agents": {"1": {"cell": "c0", "rank_p": 0, "rank_d": 0, "choice": "b"},
                "2": {"cell": "c0", "rank_p": 0, "rank_d": 1, "choice": "a"}}},
    {"id": "w4", "nominals": ["w4"], "atoms": ["m"],
     "agents": {"1": {"cell": "c0", "rank_p": 0, "rank_d": 1, "choice": "b"},
                "2": {"cell": "c0", "rank_p": 0, "rank_d": 0, "choice": "b"}}}
  ]
}"#;

/// Same shape but the two choice functions never combine one agent's `a`
/// with the other's `b`, so joint realizability fails.
const DEPENDENT_CHOICES: &str = r#"{
  "version": 1,
  "agents": ["1", "2"],
  "atoms": ["m"],
  "actions": ["a", "b"],
  "worlds": [
    {"id": "w1", "nominals": ["w1"], "atoms": ["m"],
     "agents": {"1": {"cell": "c0", "rank_p": 0, "rank_d": 0, "choice": "a"},
                "2": {"cell": "c0", "rank_p": 0, "rank_d": 0, "choice": "a"}}},
    {"id": "w2", "nominals": ["w2"], "atoms": [],
     "agents": {"1": {"cell": "c0", "rank_p": 0, "rank_d": 0, "choice": "b"},
                "2": {"cell": "c0", "rank_p": 0, "rank_d": 0, "choice": "b"}}}
  ]
}"#;

#[test]
fn check_reports_every_world_and_exits_zero_when_valid() {
    let out = bin()
        .args(["check", "--model", &fixture("mcross.json"), "--formula", "SD{1}(!lo1 & !co)"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let text = stdout(&out);
    assert_eq!(text.lines().count(), 4);
    assert!(text.lines().all(|l| l.ends_with("true")), "{text}");
}

#[test]
fn check_exits_one_when_the_formula_fails_somewhere() {
    let out = bin()
        .args(["check", "--model", &fixture("mcross.json"), "--formula", "B{1} co"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn check_restricts_to_a_single_world() {
    let out = bin()
        .args(["check", "--model", &fixture("mcross.json"), "--formula", "co", "--world", "w1"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(stdout(&out).trim(), "w1\ttrue");
}

#[test]
fn check_json_lines_parse_and_carry_a_version() {
    let out = bin()
        .args(["--json", "check", "--model", &fixture("mcross.json"), "--formula", "lo1"])
        .output()
        .unwrap();
    let lines = json_lines(&out);
    assert_eq!(lines.len(), 4);
    for line in &lines {
        assert_eq!(line["version"], 1);
        assert_eq!(line["command"], "check");
        assert!(line["value"].is_boolean());
    }
}

#[test]
fn check_accepts_dynamic_formulas() {
    let out = bin()
        .args([
            "check",
            "--model",
            &fixture("m1.json"),
            "--formula",
            "[radB{1} !p](B{1} !p & SB{1} !p)",
        ])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
}

#[test]
fn truthset_lists_the_satisfying_worlds() {
    let out = bin()
        .args(["truthset", "--model", &fixture("mcross.json"), "--formula", "lo1"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(stdout(&out).trim(), "w1 w2 w4");

    let empty = bin()
        .args(["truthset", "--model", &fixture("mcross.json"), "--formula", "false"])
        .output()
        .unwrap();
    assert_eq!(empty.status.code(), Some(1));
    assert_eq!(stdout(&empty).trim(), "(empty)");
}

#[test]
fn validate_accepts_the_fixtures_and_rejects_dependent_choices() {
    let ok = bin().args(["validate", "--model", &fixture("mcross-g.json")]).output().unwrap();
    assert_eq!(ok.status.code(), Some(0));

    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("dependent.json");
    std::fs::write(&path, DEPENDENT_CHOICES).unwrap();
    let bad = bin()
        .args(["--json", "validate", "--model", path.to_str().unwrap()])
        .output()
        .unwrap();
    assert_eq!(bad.status.code(), Some(1));
    let lines = json_lines(&bad);
    let last = lines.last().unwrap();
    assert_eq!(last["ok"], false);
    assert!(lines.len() > 1, "expected violation lines before the summary");
    assert!(
        lines[..lines.len() - 1]
            .iter()
            .any(|l| l["text"].as_str().unwrap().contains("jointly played nowhere")),
        "{lines:?}"
    );
}

#[test]
fn transform_writes_the_upgraded_model_and_a_changes_sidecar() {
    let dir = tempfile::tempdir().unwrap();
    let out_path = dir.path().join("upgraded.json");
    let out = bin()
        .args([
            "transform",
            "--model",
            &fixture("m1.json"),
            "--op",
            "radB",
            "--agent",
            "1",
            "--input",
            "!p",
            "--out",
            out_path.to_str().unwrap(),
        ])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));

    // The upgraded model is loadable and the input is now strongly believed.
    let believed = bin()
        .args([
            "check",
            "--model",
            out_path.to_str().unwrap(),
            "--formula",
            "B{1} !p & SB{1} !p",
        ])
        .output()
        .unwrap();
    assert_eq!(believed.status.code(), Some(0), "{}", stderr(&believed));

    let sidecar = dir.path().join("upgraded.changes.json");
    let changes: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&sidecar).unwrap()).unwrap();
    let moved = changes.as_array().unwrap();
    assert!(!moved.is_empty());
    for c in moved {
        assert_eq!(c["dim"], "P");
        assert!(c["world"].is_string());
    }
}

#[test]
fn transform_without_out_prints_a_loadable_model() {
    let out = bin()
        .args([
            "transform", "--model", &fixture("m1.json"),
            "--op", "conD", "--agent", "1", "--input", "p",
        ])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
    let model: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(model["version"], 1);
    assert!(model["worlds"].is_array());
}

#[test]
fn rewrite_prints_an_equivalent_static_formula() {
    let out = bin().args(["rewrite", "--formula", "[radB{1} p] q"]).output().unwrap();
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(stdout(&out).trim(), "q");
}

#[test]
fn game_lists_the_crossroad_equilibria() {
    let out = bin()
        .args(["game", "--model", &fixture("mcross-g.json"), "--mode", "opt"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(stdout(&out).trim(), "w1,w2,w3,w4\topt\t1:C,2:S | 1:S,2:C");

    let json_out = bin()
        .args(["--json", "game", "--model", &fixture("mcross-g.json")])
        .output()
        .unwrap();
    let lines = json_lines(&json_out);
    assert_eq!(lines.len(), 2, "one line per mode");
    for line in &lines {
        assert_eq!(line["version"], 1);
        assert_eq!(line["equilibria"].as_array().unwrap().len(), 2);
    }
}

#[test]
fn game_exits_one_when_no_equilibrium_exists() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("pennies.json");
    std::fs::write(&path, MATCHING_PENNIES).unwrap();
    let out = bin().args(["game", "--model", path.to_str().unwrap()]).output().unwrap();
    assert_eq!(out.status.code(), Some(1), "{}", stderr(&out));
    assert!(stdout(&out).contains("(none)"));
}

#[test]
fn game_respects_the_budget_environment_variable() {
    let out = bin()
        .args(["game", "--model", &fixture("mcross-g.json")])
        .env("COGMODAL_BUDGET", "1")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("budget"), "{}", stderr(&out));
}

#[test]
fn game_report_file_covers_both_modes_and_rationality() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("report.json");
    let out = bin()
        .args([
            "game", "--model", &fixture("mcross-g.json"),
            "--out", path.to_str().unwrap(),
        ])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    assert_eq!(report["version"], 1);
    let group = &report["groups"][0];
    assert_eq!(group["equilibria_optimistic"].as_array().unwrap().len(), 2);
    assert_eq!(group["equilibria_pessimistic"].as_array().unwrap().len(), 2);
    assert!(!group["best_responses"].as_array().unwrap().is_empty());
    assert!(!group["rationality"].as_array().unwrap().is_empty());
}

#[test]
fn fuzz_reports_clean_suites_with_exit_zero() {
    let out = bin()
        .args(["fuzz", "--suite", "dlca-axioms", "--models", "15", "--seed", "3"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    assert!(stdout(&out).contains("0 failures"));
}

#[test]
fn fuzz_persists_counterexamples_and_replay_reproduces_them() {
    let dir = tempfile::tempdir().unwrap();
    let report_path = dir.path().join("control.json");
    let out = bin()
        .args([
            "fuzz", "--suite", "negative-control", "--models", "60", "--seed", "7",
            "--out", report_path.to_str().unwrap(),
        ])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1), "the planted flaw must be found");

    // Replaying the whole report confirms every embedded failure.
    let replayed = bin()
        .args(["replay", "--file", report_path.to_str().unwrap()])
        .output()
        .unwrap();
    assert_eq!(replayed.status.code(), Some(1));
    assert!(stdout(&replayed).contains("still fails"));

    // A single extracted counterexample file replays the same way.
    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&report_path).unwrap()).unwrap();
    let single_path = dir.path().join("one.json");
    std::fs::write(&single_path, report["failures"][0].to_string()).unwrap();
    let single = bin()
        .args(["--json", "replay", "--file", single_path.to_str().unwrap()])
        .output()
        .unwrap();
    assert_eq!(single.status.code(), Some(1));
    let lines = json_lines(&single);
    assert_eq!(lines.len(), 1);
    assert_eq!(lines[0]["reproduces"], true);
}

#[test]
fn replay_exits_zero_when_the_formula_holds() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("hold.json");
    // Any structurally loadable model will do; `m` is its declared atom.
    let ce = serde_json::json!({
        "version": 1,
        "suite": "manual",
        "world": "w1",
        "formula": "m | !m",
        "model": serde_json::from_str::<serde_json::Value>(DEPENDENT_CHOICES).unwrap(),
    });
    std::fs::write(&path, ce.to_string()).unwrap();
    let out = bin().args(["replay", "--file", path.to_str().unwrap()]).output().unwrap();
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    assert!(stdout(&out).contains("no longer fails"));
}

#[test]
fn usage_and_input_errors_exit_two() {
    // Missing the required formula group.
    let usage = bin().args(["check", "--model", &fixture("m0.json")]).output().unwrap();
    assert_eq!(usage.status.code(), Some(2));

    // Syntax error with a location.
    let parse = bin()
        .args(["check", "--model", &fixture("m0.json"), "--formula", "B{1}("])
        .output()
        .unwrap();
    assert_eq!(parse.status.code(), Some(2));
    assert!(stderr(&parse).contains("1:6"), "{}", stderr(&parse));

    // Unknown suite names the alternatives.
    let suite = bin().args(["fuzz", "--suite", "nope", "--models", "1"]).output().unwrap();
    assert_eq!(suite.status.code(), Some(2));
    assert!(stderr(&suite).contains("dlca-axioms"));

    // Unreadable model file.
    let missing = bin()
        .args(["check", "--model", "/nonexistent.json", "--formula", "p"])
        .output()
        .unwrap();
    assert_eq!(missing.status.code(), Some(2));
}

#[test]
fn fuzz_suite_listing_prints_every_suite() {
    let out = bin().args(["fuzz", "--suite", "list"]).output().unwrap();
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    for name in ["dlca-axioms", "revision-laws", "negative-control", "program-algebra"] {
        assert!(text.lines().any(|l| l == name), "missing {name}");
    }
}
