use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn lsync(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_lsync")).args(args).output().expect("lsync runs")
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("JSON on stdout")
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn dyck_build_groups_and_dot() {
    let dir = tempfile::tempdir().unwrap();
    let spec = dir.path().join("dyck2.json");
    std::fs::write(&spec, r#"{"kind":"dyck","n":2}"#).unwrap();
    let graph = dir.path().join("g.json");
    let out = lsync(&["build", "--spec", path(&spec), "--levels", "3", "--out", path(&graph)]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    assert_eq!(json(&out)["vertex_counts"], serde_json::json!([1, 2, 4, 8]));

    let out = lsync(&["groups", path(&graph)]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert_eq!(v["k0"]["stabilization"]["torsion"], "Z/2");
    assert_eq!(v["bowen_franks"]["bf0"], "Z/2");

    let dot = dir.path().join("l1.dot");
    let out = lsync(&["dot", path(&graph), "--level", "1", "--out", path(&dot)]);
    assert_eq!(out.status.code(), Some(0));
    let text = std::fs::read_to_string(&dot).unwrap();
    assert!(text.starts_with("digraph"));
    assert_eq!(text.lines().filter(|l| l.contains("-> \"2:") && l.contains("label")).count(), 12);
    assert_eq!(text.matches("style=dashed").count(), 4);
    let vertices: Vec<&str> = text.lines().filter(|l| l.trim_start().starts_with("\"1:") && !l.contains("->")).collect();
    assert_eq!(vertices.len(), 2);

    let out = lsync(&["validate", path(&graph)]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(json(&out)["all_pass"], true);
}

#[test]
fn compare_golden_mean_with_its_expansion() {
    let dir = tempfile::tempdir().unwrap();
    let expanded = dir.path().join("e.json");
    let out = lsync(&["expand", "--spec", "golden-mean", "--symbol", "a", "--fresh", "z", "--out", path(&expanded)]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let out = lsync(&["compare", "--left", "golden-mean", "--right", path(&expanded), "--levels", "4"]);
    assert_eq!(out.status.code(), Some(0));
    let rows = json(&out);
    let rows = rows.as_array().unwrap();
    assert!(rows.iter().all(|r| r["verdict"] != "Mismatch"));
    let four = rows.iter().filter(|r| r["invariant"].as_str().unwrap().contains("levels 4 vs 8"));
    assert!(four.clone().count() == 6 && four.clone().all(|r| r["verdict"] == "Match"));
}

#[test]
fn mismatching_invariants_exit_with_one() {
    let out = lsync(&["compare", "--left", "dyck:2", "--right", "dyck:3", "--levels", "2", "--window", "2", "--word-cap", "6"]);
    assert_eq!(out.status.code(), Some(1), "{}", String::from_utf8_lossy(&out.stderr));
    let rows = json(&out);
    assert!(rows.as_array().unwrap().iter().any(|r| r["verdict"] == "Mismatch"));
}

#[test]
fn errors_exit_with_two() {
    let out = lsync(&["build", "--spec", "full:1", "--levels", "2"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(!out.stderr.is_empty() && out.stdout.is_empty());
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, r#"{"kind":"sft","alphabet":["a"],"forbidden":[["b"]]}"#).unwrap();
    assert_eq!(lsync(&["build", "--spec", path(&bad), "--levels", "2"]).status.code(), Some(2));
    assert_eq!(lsync(&["expand", "--spec", "full:2", "--symbol", "1", "--fresh", "2"]).status.code(), Some(2));
}

#[test]
fn output_is_deterministic_and_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let a = lsync(&["build", "--spec", "golden-mean", "--levels", "4"]);
    let b = lsync(&["build", "--spec", "golden-mean", "--levels", "4"]);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
    let stored = dir.path().join("g.json");
    std::fs::write(&stored, &a.stdout).unwrap();
    let out = lsync(&["validate", path(&stored)]);
    assert_eq!(json(&out)["vertex_counts"], serde_json::json!([1, 2, 2, 2, 2]));
    let again = dir.path().join("again.json");
    assert_eq!(lsync(&["build", "--spec", "golden-mean", "--levels", "4", "--out", path(&again)]).status.code(), Some(0));
    let stored_text = std::fs::read_to_string(&stored).unwrap();
    assert_eq!(std::fs::read_to_string(&again).unwrap().trim_end(), stored_text.trim_end());
}

#[test]
fn sync_table_and_catalog() {
    let out = lsync(&["sync", "--spec", "dyck:2", "--lmax", "1", "--kmax", "2"]);
    assert_eq!(out.status.code(), Some(0));
    let rows = json(&out);
    assert!(rows.as_array().unwrap().iter().all(|r| r["verdict"] == "pass"));
    let out = lsync(&["catalog", "list"]);
    let names: Vec<String> =
        json(&out).as_array().unwrap().iter().map(|e| e["name"].as_str().unwrap().to_string()).collect();
    assert!(names.contains(&"golden-mean".to_string()) && names.contains(&"dyck:N".to_string()));
}
