use std::fs;
use std::path::PathBuf;
use std::process::{Command, Output};

fn mbc(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_mbc")).args(args).output().expect("spawn mbc")
}

fn dataset_a() -> String {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("tests/data/dataset_a.csv")
        .display()
        .to_string()
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

#[test]
fn help_exits_zero() {
    let out = mbc(&["cluster", "--help"]);
    assert_eq!(out.status.code(), Some(0));
    assert!(stdout(&out).contains("--no-anti-merge"));
}

#[test]
fn usage_error_exits_two() {
    assert_eq!(mbc(&["cluster", &dataset_a(), "--ties", "random"]).status.code(), Some(2));
    assert_eq!(mbc(&["cluster", &dataset_a(), "--k", "0"]).status.code(), Some(2));
}

#[test]
fn cluster_assignments_on_stdout() {
    let out = mbc(&["cluster", &dataset_a()]);
    assert!(out.status.success());
    assert_eq!(stdout(&out), "object,cluster\n1,1\n2,1\n3,1\n4,1\n5,2\n6,3\n7,2\n8,3\n9,4\n10,2\n");
    let manifest: serde_json::Value = serde_json::from_slice(&out.stderr).unwrap();
    assert_eq!(manifest["clusters"], 4);
    assert_eq!(manifest["termination"], "importance-tied");
}

#[test]
fn cluster_output_directory() {
    let dir = tempfile::tempdir().unwrap();
    let out_dir = dir.path().join("run");
    let out = mbc(&["cluster", &dataset_a(), "--out", out_dir.to_str().unwrap()]);
    assert!(out.status.success());
    for name in ["assignments.csv", "dendrogram.json", "dendrogram.nwk", "trace.json", "manifest.json"] {
        assert!(out_dir.join(name).exists(), "{name} missing");
    }
    let trace: serde_json::Value = serde_json::from_str(&fs::read_to_string(out_dir.join("trace.json")).unwrap()).unwrap();
    assert_eq!(trace[0]["dropped"], serde_json::json!(["E"]));
    assert_eq!(trace[1]["dropped"], serde_json::json!(["C", "D"]));
}

#[test]
fn identical_runs_give_identical_output() {
    let a = mbc(&["cluster", &dataset_a(), "--format", "json"]);
    let b = mbc(&["cluster", &dataset_a(), "--format", "json"]);
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn k_cuts_the_dendrogram() {
    let out = mbc(&["cluster", &dataset_a(), "--k", "2"]);
    assert_eq!(stdout(&out), "object,cluster\n1,1\n2,1\n3,1\n4,1\n5,2\n6,2\n7,2\n8,2\n9,2\n10,2\n");
}

#[test]
fn dendrogram_newick() {
    let out = mbc(&["dendrogram", &dataset_a(), "--format", "newick"]);
    let text = stdout(&out);
    assert!(text.trim_end().ends_with(';'));
    assert!((1..=10).all(|o| text.contains(&format!("O{o}:"))));
}

#[test]
fn importance_ranking() {
    let out = mbc(&["importance", &dataset_a(), "--format", "json"]);
    let rows: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(rows[4]["feature"], "E");
    assert_eq!(rows[4]["numerator"], 18);
    assert_eq!(rows[4]["denominator"], 142);
}

#[test]
fn similarity_matrix_csv() {
    let out = mbc(&["similarity", &dataset_a()]);
    let text = stdout(&out);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 11);
    assert_eq!(lines[1], "1,5,5,4,4,0,0,1,0,0,1");
}

#[test]
fn eval_against_labels() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("labelled.csv");
    fs::write(&path, "x,y,class\na,b,p\na,b,p\nc,d,q\nc,e,q\n").unwrap();
    let out = mbc(&["eval", path.to_str().unwrap(), "--labels", "class", "--format", "json"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let report: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(report["summary"]["purity"], 1.0);
    assert_eq!(report["summary"]["impure_clusters"], 0);

    let assignments = dir.path().join("assignments.csv");
    fs::write(&assignments, "object,cluster\n1,1\n2,1\n3,1\n4,2\n").unwrap();
    let out = mbc(&[
        "eval",
        path.to_str().unwrap(),
        "--labels",
        "class",
        "--assignments",
        assignments.to_str().unwrap(),
        "--format",
        "json",
    ]);
    let report: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(report["summary"]["misclassified"], 1);
}

#[test]
fn data_errors_exit_one_with_location() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.csv");
    fs::write(&path, "a,b\nx,y\nx,?\n").unwrap();
    let out = mbc(&["cluster", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("line 3") && err.contains("'b'"), "{err}");

    let ok = mbc(&["cluster", path.to_str().unwrap(), "--missing", "category"]);
    assert!(ok.status.success());
    assert_eq!(mbc(&["cluster", "/nonexistent/input.csv"]).status.code(), Some(1));
}
