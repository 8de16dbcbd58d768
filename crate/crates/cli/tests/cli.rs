use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

const INTRO: &str = r#"{
  "agents": ["a1", "a2"],
  "items": ["g1", "g2", "g3"],
  "agent_valuations": [[2, 1, 0], [0, 1, 2]],
  "allocator_valuations": [[0, 2, 1], [1, 2, 0]]
}"#;

fn dualfair(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_dualfair"))
        .args(args)
        .env_remove("DUALFAIR_CAP")
        .output()
        .expect("binary runs")
}

fn write(dir: &TempDir, name: &str, text: &str) -> PathBuf {
    let path = dir.path().join(name);
    std::fs::write(&path, text).unwrap();
    path
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| panic!("{e}: {}", String::from_utf8_lossy(&out.stdout)))
}

#[test]
fn check_intro_doubly_ef1() {
    let dir = TempDir::new().unwrap();
    let intro = write(&dir, "intro.json", INTRO);
    let args = ["check", "--instance", s(&intro), "--criterion", "ef", "--c", "1", "--perspective", "doubly"];
    let out = dualfair(&[&args[..], &["--allocation", "[[0,2],[1]]"]].concat());
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(json(&out)["verdict"], true);

    // round robin by the agents fails on the allocator's side, and check still exits 0
    let rr = write(&dir, "rr.json", "[[0,1],[2]]");
    let at = format!("@{}", s(&rr));
    let out = dualfair(&[&args[..], &["--allocation", &at]].concat());
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(json(&out)["verdict"], false);
}

#[test]
fn solve_rejects_mismatched_class() {
    let dir = TempDir::new().unwrap();
    let path = write(
        &dir,
        "x.json",
        r#"{"agents": 2, "items": 3, "agent_valuations": [[1, 2, 3], [1, 1, 1]], "allocator_valuations": [[1, 1, 1], [1, 1, 1]]}"#,
    );
    let out = dualfair(&["solve", "--algorithm", "bivalued-prop2", "--instance", s(&path)]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("bivalued-prop2") && err.contains("bi-valued"), "{err}");
}

#[test]
fn solve_embeds_certificate() {
    let dir = TempDir::new().unwrap();
    let intro = write(&dir, "intro.json", INTRO);
    let out_path = dir.path().join("out.json");
    let out = dualfair(&["solve", "--algorithm", "two-agent-ef1", "--instance", s(&intro), "--out", s(&out_path)]);
    assert_eq!(out.status.code(), Some(0));
    assert!(out.stdout.is_empty());
    let body: Value = serde_json::from_str(&std::fs::read_to_string(&out_path).unwrap()).unwrap();
    assert_eq!(body["algorithm"], "two-agent-ef1");
    assert_eq!(body["certificate"]["verdict"], true);
}

#[test]
fn maximize_lp_on_binary_gadget() {
    let dir = TempDir::new().unwrap();
    let gadget = dir.path().join("thm51.json");
    let out = dualfair(&["gen", "gadget", "--kind", "thm51_partition_ef", "--e", "1", "--out", s(&gadget)]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let out = dualfair(&["maximize", "--constraint", "prop", "--c", "1", "--method", "lp-binary", "--instance", s(&gadget)]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let result = json(&out);
    assert_eq!(result["fairness_certificate"]["verdict"], true);

    // the oracle agrees with the objective
    let oracle = dualfair(&["oracle", "best", "--instance", s(&gadget), "--criterion", "prop", "--c", "1"]);
    assert_eq!(oracle.status.code(), Some(0));
    assert_eq!(json(&oracle)["result"]["optimum"], result["objective"]);

    let mismatch = dualfair(&["maximize", "--constraint", "ef", "--c", "1", "--method", "lp-binary", "--instance", s(&gadget)]);
    assert_eq!(mismatch.status.code(), Some(2));
}

#[test]
fn gadget_optimum_is_two() {
    let dir = TempDir::new().unwrap();
    let gadget = dir.path().join("g.json");
    assert_eq!(
        dualfair(&["gen", "gadget", "--kind", "thm51_partition_ef", "--e", "1/2,1/2", "--out", s(&gadget)]).status.code(),
        Some(0)
    );
    let out = dualfair(&["oracle", "best", "--instance", s(&gadget), "--criterion", "ef", "--c", "1", "--jobs", "2"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(json(&out)["result"]["optimum"], 2);
}

#[test]
fn triple_profiles_have_no_common_ef1() {
    let dir = TempDir::new().unwrap();
    let profiles = dir.path().join("p.json");
    let out = dualfair(&["gen", "gadget", "--kind", "thm66_triple", "--profiles", "--out", s(&profiles)]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let out = dualfair(&["oracle", "multi", "--profiles", s(&profiles), "--criterion", "ef", "--c", "1"]);
    assert_eq!(out.status.code(), Some(1));
    assert_eq!(json(&out)["exists"], false);
}

#[test]
fn oracle_cap_exits_three() {
    let dir = TempDir::new().unwrap();
    let inst = dir.path().join("r.json");
    assert_eq!(dualfair(&["gen", "random", "--seed", "3", "--agents", "4", "--items", "12", "--out", s(&inst)]).status.code(), Some(0));
    let out = dualfair(&["oracle", "best", "--instance", s(&inst), "--criterion", "ef", "--c", "1", "--cap", "1000"]);
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn search_reports_zero_counterexamples() {
    let out = dualfair(&[
        "oracle", "search", "--space", "binary", "--agents", "2", "--items", "0..2", "--criterion", "prop", "--c", "1", "--exhaustive",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let report = json(&out);
    assert_eq!(report["exhaustive"], true);
    assert_eq!(report["counterexamples_found"].as_array().unwrap().len(), 0);
    assert!(String::from_utf8_lossy(&out.stderr).contains("examined"));
}

#[test]
fn graph_commands() {
    let out = dualfair(&["graph", "kneser", "--n", "4", "--k", "3", "--s", "2"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(json(&out)["chromatic_number"], 4);

    let out = dualfair(&["graph", "gamma", "--n", "3", "--dimacs"]);
    assert!(String::from_utf8_lossy(&out.stdout).lines().any(|l| l.starts_with("p edge 8 ")));

    let out = dualfair(&["graph", "gamma", "--n", "7"]);
    assert_eq!(out.status.code(), Some(3));

    let dir = TempDir::new().unwrap();
    let intro = write(&dir, "intro.json", INTRO);
    let out = dualfair(&["graph", "ef1-cover", "--instance", s(&intro)]);
    assert_eq!(json(&out)["verdict"], true);
}

#[test]
fn random_generation_is_deterministic() {
    let a = dualfair(&["gen", "random", "--seed", "11", "--agents", "3", "--items", "5", "--agents-space", "bivalued"]);
    let b = dualfair(&["gen", "random", "--seed", "11", "--agents", "3", "--items", "5", "--agents-space", "bivalued"]);
    assert_eq!(a.stdout, b.stdout);
    assert_eq!(json(&a)["agents"], 3);
}

#[test]
fn bench_suite_writes_csv_and_summary() {
    let dir = TempDir::new().unwrap();
    let suite = write(
        &dir,
        "suite.json",
        r#"{"cases": [
            {"name": "pairing", "solver": "two-agent-ef", "c": 1, "agents": [2, 2], "items": [1, 7], "seeds": {"start": 0, "count": 25}},
            {"name": "closure", "solver": "prop-log", "agents": [2, 5], "items": [0, 9], "seeds": {"start": 0, "count": 10}}
        ]}"#,
    );
    let csv_path = dir.path().join("runs.csv");
    let out = dualfair(&["bench", "--suite", s(&suite), "--csv", s(&csv_path)]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stdout));
    let summary = json(&out);
    assert_eq!(summary["runs"], 35);
    assert_eq!(summary["all_passed"], true);

    let mut reader = csv::Reader::from_path(&csv_path).unwrap();
    assert_eq!(
        reader.headers().unwrap().iter().collect::<Vec<_>>(),
        ["case", "seed", "method", "objective", "oracle", "ratio", "micros"]
    );
    assert_eq!(reader.records().count(), 35);

    // the summary omits timings, so a rerun is byte-identical
    let again = dualfair(&["bench", "--suite", s(&suite)]);
    assert_eq!(again.stdout, out.stdout);
}

#[test]
fn empty_suite_exits_zero() {
    let dir = TempDir::new().unwrap();
    let suite = write(&dir, "empty.json", r#"{"cases": []}"#);
    let csv_path = dir.path().join("runs.csv");
    let out = dualfair(&["bench", "--suite", s(&suite), "--csv", s(&csv_path)]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(json(&out)["runs"], 0);
    assert_eq!(std::fs::read_to_string(&csv_path).unwrap().trim(), "case,seed,method,objective,oracle,ratio,micros");
}

#[test]
fn usage_errors() {
    assert_eq!(dualfair(&[]).status.code(), Some(2));
    assert_eq!(dualfair(&["--version"]).status.code(), Some(0));
    assert_eq!(dualfair(&["solve", "--instance", "/nonexistent", "--algorithm", "prop-log"]).status.code(), Some(2));
    assert_eq!(dualfair(&["solve", "--instance", "x", "--algorithm", "magic"]).status.code(), Some(2));
}
