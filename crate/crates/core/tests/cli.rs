use std::collections::BTreeSet;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use eqmonoid::fixtures::example1;
use eqmonoid::io::parse_word;
use eqmonoid::EquivMap;
use serde_json::Value;
use tempfile::TempDir;

const EXAMPLE1: &str = include_str!("data/example1.json");

fn eqmonoid(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_eqmonoid"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn stderr(out: &Output) -> String {
    String::from_utf8(out.stderr.clone()).unwrap()
}

fn write(dir: &TempDir, name: &str, text: &str) -> PathBuf {
    let path = dir.path().join(name);
    fs::write(&path, text).unwrap();
    path
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn example_file(dir: &TempDir) -> PathBuf {
    write(dir, "example1.json", EXAMPLE1)
}

#[test]
fn validate_reports_shape() {
    let dir = TempDir::new().unwrap();
    let out = eqmonoid(&["validate", s(&example_file(&dir))]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(stdout(&out).trim(), "valid; |G|=2, |X|=4, orbits=3");
}

#[test]
fn validate_rejects_corrupted_action() {
    let dir = TempDir::new().unwrap();
    let bad = write(&dir, "bad.json", &EXAMPLE1.replace("[0, 2, 1, 3]", "[0, 2, 2, 3]"));
    let out = eqmonoid(&["validate", s(&bad)]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("CompatibilityViolated"), "{}", stderr(&out));
}

#[test]
fn validate_rejects_missing_row() {
    let dir = TempDir::new().unwrap();
    let text = EXAMPLE1.replace(",\n    \"a\": [0, 2, 1, 3]", "");
    assert_ne!(text, EXAMPLE1);
    let out = eqmonoid(&["validate", s(&write(&dir, "missing.json", &text))]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("parse error"), "{}", stderr(&out));
}

#[test]
fn validate_rejects_malformed_json() {
    let dir = TempDir::new().unwrap();
    let out = eqmonoid(&["validate", s(&write(&dir, "broken.json", "{\"group\":"))]);
    assert_eq!(out.status.code(), Some(2));
    let out = eqmonoid(&["validate", s(&dir.path().join("absent.json"))]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn enumerate_lists_sixteen_words_that_round_trip() {
    let dir = TempDir::new().unwrap();
    let out = eqmonoid(&["enumerate", s(&example_file(&dir))]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 16);
    assert_eq!(lines[0], "(0000)");
    let mut sorted = lines.clone();
    sorted.sort();
    assert_eq!(lines, sorted);

    let x = example1();
    let reparsed: BTreeSet<Vec<usize>> = lines
        .iter()
        .map(|l| EquivMap::new(&x, parse_word(&x, l).unwrap()).unwrap().word().to_vec())
        .collect();
    let expected: BTreeSet<Vec<usize>> = eqmonoid::endo::enumerate_endos(&x, 100)
        .unwrap()
        .iter()
        .map(|f| f.word().to_vec())
        .collect();
    assert_eq!(reparsed, expected);
}

#[test]
fn count_uses_the_closed_form() {
    let dir = TempDir::new().unwrap();
    let out = eqmonoid(&["count", s(&example_file(&dir))]);
    assert_eq!(stdout(&out).trim(), "16");
    let trivial = r#"{"group": {"kind": "named", "family": "cyclic", "n": 2},
        "points": ["p", "q"], "action": {"e": [0, 1], "a": [0, 1]}}"#;
    let out = eqmonoid(&["count", s(&write(&dir, "trivial.json", trivial))]);
    assert_eq!(stdout(&out).trim(), "4");
}

#[test]
fn caps_exit_with_three() {
    let dir = TempDir::new().unwrap();
    let input = example_file(&dir);
    for cmd in ["enumerate", "green", "collapsings"] {
        let out = eqmonoid(&[cmd, s(&input), "--cap", "10"]);
        assert_eq!(out.status.code(), Some(3), "{cmd}: {}", stderr(&out));
    }
    let out = eqmonoid(&["verify", "--input", s(&input), "--cap", "10"]);
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn green_json_has_six_l_classes() {
    let dir = TempDir::new().unwrap();
    let out = eqmonoid(&["green", s(&example_file(&dir)), "--format", "json"]);
    assert_eq!(out.status.code(), Some(0));
    let v: Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(v["L"].as_array().unwrap().len(), 6);
    assert_eq!(v["elements"].as_array().unwrap().len(), 16);
}

#[test]
fn green_ascii_puts_constants_in_singleton_rows() {
    let dir = TempDir::new().unwrap();
    let out = eqmonoid(&["green", s(&example_file(&dir)), "--format", "ascii"]);
    let text = stdout(&out);
    assert!(text.contains("D0 (2 R x 1 L)"), "{text}");
    assert!(text.lines().any(|l| l.trim() == "| (0000) |"));
    assert!(text.lines().any(|l| l.trim() == "| (3333) |"));
}

#[test]
fn green_dot_is_a_graph() {
    let dir = TempDir::new().unwrap();
    let out = eqmonoid(&["green", s(&example_file(&dir)), "--format", "dot"]);
    let text = stdout(&out);
    assert!(text.starts_with("digraph green {"));
    assert!(text.trim_end().ends_with('}'));
    assert_eq!(text.matches('{').count(), text.matches('}').count());
}

#[test]
fn green_rejects_unknown_format() {
    let dir = TempDir::new().unwrap();
    let out = eqmonoid(&["green", s(&example_file(&dir)), "--format", "svg"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn collapsings_census_of_example_one() {
    let dir = TempDir::new().unwrap();
    let out = eqmonoid(&["collapsings", s(&example_file(&dir))]);
    assert_eq!(out.status.code(), Some(0));
    let v: Value = serde_json::from_str(&stdout(&out)).unwrap();
    let entries = v.as_array().unwrap();
    assert_eq!(entries.len(), 8);
    assert_eq!(entries.iter().filter(|e| e["fixing"] == true).count(), 4);
    let tau = entries.iter().find(|e| e["element"] == "(3000)").unwrap();
    let expected: Value =
        serde_json::from_str(r#"{"element":"(3000)","x":1,"y":3,"z":1,"H":["e"],"K_class":[["e","a"]],"fixing":false}"#)
            .unwrap();
    assert_eq!(tau, &expected);
}

#[test]
fn collapsings_of_a_single_orbit_is_empty() {
    let dir = TempDir::new().unwrap();
    let regular = r#"{"group": {"kind": "named", "family": "cyclic", "n": 3},
        "points": ["0", "1", "2"], "action": {"e": [0, 1, 2], "a": [1, 2, 0], "a^2": [2, 0, 1]}}"#;
    let out = eqmonoid(&["collapsings", s(&write(&dir, "z3.json", regular))]);
    assert_eq!(out.status.code(), Some(0));
    let v: Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(v, Value::Array(vec![]));
}

#[test]
fn emissions_are_deterministic_and_honor_output() {
    let dir = TempDir::new().unwrap();
    let input = example_file(&dir);
    for args in [
        vec!["green", s(&input), "--format", "json"],
        vec!["green", s(&input), "--format", "ascii"],
        vec!["collapsings", s(&input)],
        vec!["enumerate", s(&input)],
    ] {
        assert_eq!(eqmonoid(&args).stdout, eqmonoid(&args).stdout, "{args:?}");
    }
    let target = dir.path().join("eggbox.dot");
    let out = eqmonoid(&["green", s(&input), "--format", "dot", "--output", s(&target)]);
    assert_eq!(out.status.code(), Some(0));
    assert!(out.stdout.is_empty());
    assert!(fs::read_to_string(&target).unwrap().starts_with("digraph green {"));
}

#[test]
fn verify_example_one_passes() {
    let dir = TempDir::new().unwrap();
    let report = dir.path().join("report.json");
    let out = eqmonoid(&["verify", "--input", s(&example_file(&dir)), "--checks", "all", "--report", s(&report)]);
    assert_eq!(out.status.code(), Some(0), "{}", stdout(&out));
    let v: Value = serde_json::from_str(&fs::read_to_string(&report).unwrap()).unwrap();
    assert_eq!(v["passed"], 23);
    assert_eq!(v["failed"], 0);
}

#[test]
fn verify_catches_a_corrupted_engine() {
    let dir = TempDir::new().unwrap();
    let report = dir.path().join("report.json");
    let out = eqmonoid(&[
        "verify",
        "--input",
        s(&example_file(&dir)),
        "--checks",
        "P7",
        "--mutate",
        "l-by-image",
        "--output",
        s(&report),
    ]);
    assert_eq!(out.status.code(), Some(1));
    let v: Value = serde_json::from_str(&fs::read_to_string(&report).unwrap()).unwrap();
    let cex = &v["reports"][0]["counterexample"];
    assert_eq!(cex["check_id"], "P7");
    assert_eq!(cex["elements"].as_array().unwrap().len(), 2);

    let parsed: eqmonoid::verify::Counterexample = serde_json::from_value(cex.clone()).unwrap();
    assert!(eqmonoid::verify::replay(&parsed).unwrap().confirms_failure());
}

#[test]
fn verify_rejects_unknown_check_ids() {
    let dir = TempDir::new().unwrap();
    let out = eqmonoid(&["verify", "--input", s(&example_file(&dir)), "--checks", "P1,P42"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("P42"));
}

#[test]
fn verify_runs_a_corpus_with_seed_override() {
    let dir = TempDir::new().unwrap();
    let spec = r#"{"seed": 1, "groups": [{"kind": "named", "family": "cyclic", "n": 2},
        {"kind": "named", "family": "symmetric", "n": 3}],
        "max_points": 8, "max_monoid": 500, "count": 4}"#;
    let corpus = write(&dir, "corpus.json", spec);
    let report = dir.path().join("report.json");
    let run = |seed: &str| {
        let out = eqmonoid(&["verify", "--corpus", s(&corpus), "--seed", seed, "--report", s(&report)]);
        assert_eq!(out.status.code(), Some(0), "{}", stdout(&out));
        let v: Value = serde_json::from_str(&fs::read_to_string(&report).unwrap()).unwrap();
        assert_eq!(v["reports"].as_array().unwrap().len(), 4 * 23);
        v["reports"]
            .as_array()
            .unwrap()
            .iter()
            .map(|r| (r["gset"].clone(), r["check_id"].clone(), r["status"].clone(), r["cases"].clone()))
            .collect::<Vec<_>>()
    };
    assert_eq!(run("5"), run("5"));

    let bad = write(&dir, "bad.json", &spec.replace("\"count\": 4", "\"count\": 0"));
    assert_eq!(eqmonoid(&["verify", "--corpus", s(&bad)]).status.code(), Some(2));
}
