use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_reflectofold"))
        .args(args)
        .env_remove("REFLECTOFOLD_GOLDEN")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn fixture(name: &str) -> String {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../core/fixtures").join(name).display().to_string()
}

#[test]
fn pipeline_succeeds_with_the_four_cusp_types() {
    let o = run(&["pipeline"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let out = stdout(&o);
    for (name, class) in [("R_T", "E1"), ("R_half", "E2"), ("R_quarter", "E4"), ("R_HW", "E6")] {
        let line = out.lines().find(|l| l.starts_with(&format!("{name} "))).unwrap();
        assert!(line.contains(&format!("cusp {class} ")), "{line}");
    }
    assert!(out.ends_with("pipeline: ok\n"));
}

#[test]
fn pipeline_json_is_structured_and_deterministic() {
    let a = run(&["pipeline", "--json"]);
    let b = run(&["pipeline", "--json"]);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
    let v: serde_json::Value = serde_json::from_slice(&a.stdout).unwrap();
    assert_eq!(v["ok"], true);
    assert_eq!(v["states"].as_array().unwrap().len(), 9);
    assert_eq!(v["schemes"].as_array().unwrap().len(), 4);
}

#[cfg(feature = "test-hooks")]
#[test]
fn mutated_golden_cell_fails_the_pipeline() {
    let o = run(&["pipeline", "--mutate", "t7:3:0:1=3"]);
    assert_eq!(o.status.code(), Some(1));
    let err = String::from_utf8(o.stderr).unwrap();
    assert!(err.contains("t7 type 3: 1 differences"), "{err}");
    assert_eq!(run(&["pipeline", "--mutate", "t7:3"]).status.code(), Some(2));
}

#[test]
fn failing_seed_stops_gracefully() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("bad.cox");
    let text = include_str!("../../core/data/d.cox").replace("edge 2 1 inf", "edge 2 1 3");
    fs::write(&p, text).unwrap();
    let p = p.display().to_string();
    let o = run(&["pipeline", "--seed-file", &p]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).contains("(a) FAIL"));
    assert_eq!(run(&["seed", "--seed-file", &p]).status.code(), Some(1));
    assert_eq!(run(&["seed", "--seed-file", "/nonexistent/seed.cox"]).status.code(), Some(2));
}

#[test]
fn golden_override() {
    let dir = tempfile::tempdir().unwrap();
    let missing = dir.path().join("missing.txt");
    let o = Command::new(env!("CARGO_BIN_EXE_reflectofold"))
        .args(["tables", "t2", "--diff"])
        .env("REFLECTOFOLD_GOLDEN", &missing)
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn tables() {
    let o = run(&["tables", "t2"]);
    assert_eq!(o.status.code(), Some(0));
    let out = stdout(&o);
    assert!(out.contains("t2 type 3 (2x2)\n3   || 1 2\n3_2 || 2 1\n"), "{out}");

    let o = run(&["tables", "tr1", "--diff"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).ends_with("\n0 differences\n"));

    let o = run(&["tables", "all", "--diff"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).ends_with("\n0 differences\n"));

    assert_eq!(run(&["tables", "t9"]).status.code(), Some(2));

    let dir = tempfile::tempdir().unwrap();
    let d = dir.path().display().to_string();
    assert_eq!(run(&["tables", "t7", "--outdir", &d]).status.code(), Some(0));
    let csv = fs::read_to_string(dir.path().join("t7_type3.csv")).unwrap();
    assert_eq!(csv.lines().count(), 28);
}

fn svg_files(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut v: Vec<_> = fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .map(|p| (p.file_name().unwrap().to_string_lossy().into_owned(), fs::read(&p).unwrap()))
        .collect();
    v.sort();
    v
}

#[test]
fn svg_pictures() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    for dir in [&a, &b] {
        let d = dir.path().display().to_string();
        assert_eq!(run(&["svg", "P1", "--outdir", &d]).status.code(), Some(0));
    }
    let files = svg_files(a.path());
    assert_eq!(files.len(), 6);
    assert_eq!(files, svg_files(b.path()));

    let c = tempfile::tempdir().unwrap();
    let d = c.path().display().to_string();
    assert_eq!(run(&["svg", "P0", "--outdir", &d]).status.code(), Some(0));
    assert_eq!(svg_files(c.path()).len(), 5);
    assert_eq!(run(&["svg", "P2:1_2", "--outdir", &d]).status.code(), Some(0));
    let pic = fs::read_to_string(c.path().join("P2_1_2.svg")).unwrap();
    assert!(pic.contains(">3_2</text>") && pic.contains(">7</text>"));
    assert_eq!(run(&["svg", "P2:9", "--outdir", &d]).status.code(), Some(2));
    assert_eq!(run(&["svg", "Q2", "--outdir", &d]).status.code(), Some(2));
}

#[test]
fn classify_builtins() {
    let o = run(&["classify", "R_quarter"]);
    assert_eq!(o.status.code(), Some(0));
    let out = stdout(&o);
    assert!(out.contains(": developable") && out.contains("cusp section E4 "), "{out}");

    let o = run(&["classify", "R_HW", "--json"]);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["reflectofold"]["developable"], true);
    assert_eq!(v["cusp"]["class"], "E6");
    assert_eq!(v["cusp"]["orientable"], true);
    assert_eq!(v["cusp"]["point_group"].as_array().unwrap().len(), 4);
}

#[test]
fn classify_naive_torus_is_not_developable() {
    let o = run(&["classify", &fixture("p1_naive_torus.json")]);
    assert_eq!(o.status.code(), Some(1));
    let out = stdout(&o);
    assert!(out.contains("not developable"), "{out}");
    assert!(out.contains("type-3 facet 3 has a corner with itself (angle 3/4π)"), "{out}");
}

#[test]
fn classify_input_errors() {
    assert_eq!(run(&["classify", "R_nothing"]).status.code(), Some(2));
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("bad.json");
    fs::write(&p, r#"{"base": "P7", "pairings": [{"source": {"facet": "6_{4_5}"}, "target": {"facet": "6_{6,4_5}"}, "word": ["r9"]}]}"#).unwrap();
    let o = run(&["classify", &p.display().to_string()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).contains("pairing 0: no reflection plane named 9"));
    fs::write(&p, r#"{"base": "P7", "pairings": [{"source": {"facet": "6_{4_5}"}, "target": {"facet": "6_{6,4_5}"}, "word": ["q6"]}]}"#).unwrap();
    let o = run(&["classify", &p.display().to_string()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("pairings[0].word"));
    fs::write(&p, "{not json").unwrap();
    assert_eq!(run(&["classify", &p.display().to_string()]).status.code(), Some(2));
}

#[test]
fn usage_errors_exit_2() {
    assert_eq!(run(&["frobnicate"]).status.code(), Some(2));
    assert_eq!(run(&[]).status.code(), Some(2));
}
