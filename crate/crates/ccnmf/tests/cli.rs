use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use ccnmf::io::read_matrix;
use ccnmf_core::matrix::dot;

fn ccnmf(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ccnmf")).args(args).output().unwrap()
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn json(path: &Path) -> serde_json::Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn usage_errors_exit_2() {
    let out = ccnmf(&["collapse", "--bogus", "x.csv"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("Usage"));
    assert_eq!(ccnmf(&[]).status.code(), Some(2));
    assert_eq!(ccnmf(&["gen", "--rays", "0", "--out", "unused"]).status.code(), Some(2));
    assert_eq!(ccnmf(&["--help"]).status.code(), Some(0));
}

#[test]
fn bad_data_exits_3() {
    let dir = tempfile::tempdir().unwrap();
    let neg = dir.path().join("neg.csv");
    fs::write(&neg, "1,-2\n3,4\n").unwrap();
    let out = ccnmf(&["collapse", s(&neg)]);
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stderr).starts_with("error:"));
    assert_eq!(ccnmf(&["collapse", s(&dir.path().join("missing.csv"))]).status.code(), Some(3));
}

#[test]
fn gen_then_collapse_recovers_the_rays() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    assert!(ccnmf(&["gen", "--seed", "3", "--out", s(d)]).status.success());
    let out = d.join("out");
    let res = ccnmf(&["collapse", s(&d.join("data.csv")), "--out", s(&out)]);
    assert!(res.status.success(), "{}", String::from_utf8_lossy(&res.stderr));

    let truth = read_matrix(&d.join("rays.csv"), None).unwrap();
    let found = read_matrix(&out.join("rays.csv"), None).unwrap();
    assert_eq!(found.ncols(), truth.ncols());
    for t in truth.column_iter() {
        let t: Vec<f64> = t.iter().copied().collect();
        assert!(found.column_iter().any(|f| dot(&f.iter().copied().collect::<Vec<_>>(), &t) >= 1.0 - 1e-6));
    }
    let report = json(&out.join("collapse.json"));
    assert_eq!(report["rays"], 5);
    assert!(report["max_relative_residual"].as_f64().unwrap() <= 1e-8);
}

#[test]
fn rank_above_the_cone_size_exits_3() {
    // the third feature row is the sum of the first two: a two-ray cone
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("x.csv");
    fs::write(&data, "1,2,0,1\n0,1,3,2\n1,3,3,3\n").unwrap();
    let out = ccnmf(&["factorize", s(&data), "--rank", "3"]);
    assert_eq!(out.status.code(), Some(3));
    assert!(ccnmf(&["factorize", s(&data), "--rank", "2"]).status.success());
}

#[test]
fn bench_on_planted_clusters_is_pure_and_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let gen = ["gen", "--kind", "clusters", "--features", "12", "--samples", "60", "--seed", "5", "--out", s(d)];
    assert!(ccnmf(&gen).status.success());
    let data = d.join("data.csv");
    let run = |out: &Path| {
        let res = ccnmf(&["bench", s(&data), "--seeds", "3", "--out", s(out)]);
        assert!(res.status.success(), "{}", String::from_utf8_lossy(&res.stderr));
        res.stdout
    };
    let table = run(&d.join("a"));
    let table = String::from_utf8(table).unwrap();
    let line = table.lines().find(|l| l.starts_with("ccnmf")).unwrap();
    assert!(line.split_whitespace().nth(1).unwrap().starts_with("1.0000"), "{table}");
    assert_eq!(json(&d.join("a/bench.json"))["rows"][0]["min_purity"], 1.0);

    run(&d.join("b"));
    assert_eq!(fs::read(d.join("a/bench.json")).unwrap(), fs::read(d.join("b/bench.json")).unwrap());
}

#[test]
fn factorize_and_cluster_agree() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let gen = ["gen", "--kind", "clusters", "--features", "9", "--samples", "30", "--seed", "2", "--out", s(d)];
    assert!(ccnmf(&gen).status.success());
    for method in ["ccnmf", "mu", "anls", "onmf", "sparse"] {
        let out = d.join(method);
        let res = ccnmf(&["factorize", s(&d.join("data.csv")), "--rank", "3", "--method", method, "--out", s(&out)]);
        assert!(res.status.success(), "{method}: {}", String::from_utf8_lossy(&res.stderr));
        let report = json(&out.join("factorize.json"));
        assert_eq!(report["method"], method);
        let labels = fs::read_to_string(out.join("labels.txt")).unwrap();
        let res = ccnmf(&["cluster", s(&out.join("H.csv"))]);
        assert_eq!(String::from_utf8(res.stdout).unwrap(), labels);
        assert_eq!(labels.lines().count(), 30);
    }
}
