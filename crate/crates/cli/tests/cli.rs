use std::path::Path;
use std::process::{Command, Output};

use serde_json::{json, Value};

fn severi(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_severi")).args(args).output().expect("binary runs")
}

fn json_of(out: &Output) -> Value {
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).expect("json on stdout")
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn count_cubics() {
    let out = severi(&["count", "--d", "3", "--g", "0", "--oracle"]);
    assert!(out.status.success());
    assert!(String::from_utf8_lossy(&out.stdout).contains("12"));
    let v = json_of(&severi(&["--json", "count", "--d", "4", "--g", "1", "--oracle"]));
    assert_eq!(v["count"], json!(225));
    assert_eq!(v["agrees"], json!(true));
}

#[test]
fn output_is_deterministic() {
    let a = severi(&["--json", "enumerate", "--d", "3", "--g", "1"]);
    let b = severi(&["--json", "enumerate", "--d", "3", "--g", "1"]);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn exit_codes() {
    assert_eq!(severi(&["count", "--d", "3", "--g", "2"]).status.code(), Some(2));
    assert_eq!(severi(&["count", "--d", "0"]).status.code(), Some(2));
    assert_eq!(severi(&["count", "--d", "6"]).status.code(), Some(3));
    assert_eq!(severi(&["markings", "--d", "4", "--delta", "1"]).status.code(), Some(2));
    assert_eq!(severi(&["fiber", "--type", "/nonexistent", "--points", "/nonexistent"]).status.code(), Some(1));
    let out = Command::new(env!("CARGO_BIN_EXE_severi"))
        .env("SEVERI_WORKERS", "none")
        .args(["count", "--d", "2"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn workers_env() {
    let out = Command::new(env!("CARGO_BIN_EXE_severi"))
        .env("SEVERI_WORKERS", "2")
        .args(["--json", "count", "--d", "3", "--g", "0"])
        .output()
        .unwrap();
    assert_eq!(json_of(&out)["count"], json!(12));
}

#[test]
fn marking_classes() {
    let v = json_of(&severi(&["--json", "markings", "--d", "4", "--delta", "3", "--classes"]));
    assert_eq!(v["irreducible_classes"], json!(1));
    let v = json_of(&severi(&["--json", "markings", "--d", "4", "--delta", "4", "--classes"]));
    assert_eq!(v["irreducible_classes"], json!(0));
    assert_eq!(v["empty"], json!(true));
}

#[test]
fn marking_codim() {
    let dir = tempfile::tempdir().unwrap();
    let m1 = dir.path().join("m1.json");
    let m2 = dir.path().join("m2.json");
    std::fs::write(&m1, "[[1,2],[3,4]]").unwrap();
    std::fs::write(&m2, r#"{"d": 4, "nodes": [[1,2],[2,4]]}"#).unwrap();
    let v = json_of(&severi(&["--json", "markings", "--d", "4", "--delta", "2", "--codim", path(&m1), path(&m2)]));
    assert_eq!(v["codim"], json!(1));
}

#[test]
fn walk_writes_trace() {
    let dir = tempfile::tempdir().unwrap();
    let t = dir.path().join("t.json");
    let out = severi(&["walk", "--d", "3", "--g", "1", "--trace", path(&t)]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let trace: Value = serde_json::from_str(&std::fs::read_to_string(&t).unwrap()).unwrap();
    let term = &trace["terminal"];
    assert_eq!(term["unbounded"], json!(true));
    assert_eq!(term["free_edge_slope"], json!([0, 0]));
    assert!(trace["steps"].as_array().unwrap().len() <= trace["bound"].as_u64().unwrap() as usize);
    assert_eq!(severi(&["walk", "--d", "1"]).status.code(), Some(1));
}

#[test]
fn fiber_and_stratum_of_a_solution() {
    let dir = tempfile::tempdir().unwrap();
    let curves = json_of(&severi(&["--json", "enumerate", "--d", "2"]));
    let curve = &curves[0];
    let ty = dir.path().join("type.json");
    std::fs::write(&ty, curve.to_string()).unwrap();
    let cfg = json_of(&severi(&["--json", "walk", "--d", "2"]))["points"].clone();
    let pts = dir.path().join("points.json");
    std::fs::write(&pts, cfg.to_string()).unwrap();
    let f = json_of(&severi(&["--json", "fiber", "--type", path(&ty), "--points", path(&pts)]));
    assert_eq!(f["kind"], json!("point"));
    let c = json_of(&severi(&["--json", "classify-stratum", path(&ty)]));
    assert_eq!(c["class"], json!({"class": "nice"}));
    assert_eq!(c["dimension"], json!(c["expected_dimension"]));
}

fn line_family(monodromy: Option<Value>) -> Value {
    let curve = json!({
        "vertices": [{"id": 0, "position": ["0", "0"]}],
        "edges": [],
        "legs": [
            {"vertex": 0, "slope": [-1, 0]},
            {"vertex": 0, "slope": [0, -1]},
            {"vertex": 0, "slope": [1, 1]}
        ]
    });
    let mut fam = json!({
        "base": {"vertices": [{"id": 0}], "edges": [], "legs": []},
        "extended_degree": [[-1, 0], [0, -1], [1, 1]],
        "edges": [],
        "legs": [],
        "vertices": [curve],
        "contractions": []
    });
    if let Some(m) = monodromy {
        fam["monodromy"] = m;
    }
    fam
}

#[test]
fn validate_family() {
    let dir = tempfile::tempdir().unwrap();
    let f = dir.path().join("fam.json");
    std::fs::write(&f, line_family(None).to_string()).unwrap();
    let v = json_of(&severi(&["--json", "validate-family", path(&f)]));
    assert_eq!(v["valid"], json!(true));
    std::fs::write(&f, line_family(Some(json!([[1, 0, 2]]))).to_string()).unwrap();
    let out = severi(&["--json", "validate-family", path(&f)]);
    assert_eq!(out.status.code(), Some(1));
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["violation"]["location"], json!("monodromy"));
}
