use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn workdir(tag: &str) -> PathBuf {
    let d = std::env::temp_dir().join(format!("csg-cli-{tag}-{}", std::process::id()));
    fs::create_dir_all(&d).unwrap();
    d
}

fn csg(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_csg")).current_dir(dir).args(args).output().unwrap()
}

fn ok_json(dir: &Path, args: &[&str]) -> Value {
    let out = csg(dir, args);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).unwrap()
}

#[test]
fn family_then_exact_duel() {
    let d = workdir("duel");
    let out = csg(&d, &["family", "--name", "purgatory-duel", "--n", "1", "--m", "2", "--out", "g.json"]);
    assert!(out.status.success());
    let r = ok_json(&d, &["solve", "--game", "g.json", "--mode", "exact-duel"]);
    assert_eq!(r["verb"], "solve");
    let v = &r["results"]["values"];
    assert_eq!((v["vs"].as_str(), v["v1_1"].as_str(), v["v2_1"].as_str()), (Some("1/2"), Some("2/3"), Some("1/3")));
}

#[test]
fn tri_matrix_m3() {
    let d = workdir("matrix");
    let r = ok_json(&d, &["matrix", "--x", "0", "--y", "1", "--z", "1/2", "--m", "3"]);
    assert_eq!(r["results"]["value"], "4/7");
    assert_eq!(r["results"]["patience"], "7");
}

#[test]
fn matrix_from_grid() {
    let d = workdir("grid");
    fs::write(d.join("m.json"), r#"[["1","1/2"],["0","1"]]"#).unwrap();
    let r = ok_json(&d, &["matrix", "--grid", "m.json"]);
    assert_eq!(r["results"]["value"], "2/3");
}

#[test]
fn safe_profile_has_zero_gaps() {
    let d = workdir("safety");
    let out = csg(
        &d,
        &["family", "--name", "safety-duel", "--c", "1", "--delta", "1/216", "--out", "sd.json", "--profile-out", "p.json"],
    );
    assert!(out.status.success());
    let r = ok_json(&d, &["check", "--kind", "eps-nash", "--game", "sd.json", "--profile", "p.json", "--eps", "0"]);
    let entries = r["results"]["entries"].as_array().unwrap();
    assert!(!entries.is_empty());
    assert!(entries.iter().all(|e| e["gap"] == "0"));
    assert_eq!(r["results"]["within_eps"], true);
}

#[test]
fn value_iteration_csv_trace() {
    let d = workdir("vi");
    assert!(csg(&d, &["family", "--name", "purgatory", "--n", "1", "--m", "2", "--out", "p.json"]).status.success());
    let out = csg(&d, &["solve", "--game", "p.json", "--iters", "3", "--format", "csv"]);
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.starts_with("t,state,value\n"));
    assert!(text.contains("3,v1,3/4\n"));
}

#[test]
fn reports_are_deterministic() {
    let d = workdir("det");
    let gen = ["family", "--name", "purgatory-duel", "--n", "1", "--m", "2", "--out", "g.json", "--profile-out", "gp.json"];
    assert!(csg(&d, &gen).status.success());
    let args = ["simulate", "--game", "g.json", "--profile", "gp.json", "--episodes", "500", "--seed", "11"];
    let a = csg(&d, &args);
    let b = csg(&d, &args);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    let r: Value = serde_json::from_slice(&a.stdout).unwrap();
    assert_eq!(r["results"]["players"][0]["exact"], "1/2");
}

#[test]
fn exit_statuses() {
    let d = workdir("exit");
    assert_eq!(csg(&d, &["frobnicate"]).status.code(), Some(2));
    assert_eq!(csg(&d, &["matrix", "--x", "2/4", "--y", "1", "--z", "0", "--m", "2"]).status.code(), Some(2));
    fs::write(d.join("bad.json"), r#"{"states":[{"id":0,"name":"a","absorbing":false}],"players":2,"actions":{},"transitions":[],"objectives":[]}"#).unwrap();
    let out = csg(&d, &["solve", "--game", "bad.json"]);
    assert_eq!(out.status.code(), Some(1));
    let err: Value = serde_json::from_slice(&out.stderr).unwrap();
    assert!(err["error"].is_string());
    assert_eq!(csg(&d, &["solve", "--game", "missing.json"]).status.code(), Some(1));
}

#[test]
fn bounds_examples() {
    let d = workdir("bounds");
    let r = ok_json(&d, &["bounds", "--which", "duel-value", "--n", "2", "--m", "2", "--j", "1"]);
    assert_eq!(r["results"]["value"], "5/8");
    let r = ok_json(&d, &["bounds", "--which", "q", "--n", "7", "--k", "2", "--m", "2", "--eps", "1/8", "--delta", "1/2"]);
    assert_eq!(r["results"]["value"], "953948");
}

#[test]
fn long_values_truncate_only_on_screen() {
    let d = workdir("trunc");
    let args = ["bounds", "--which", "duel-patience", "--n", "3", "--m", "9", "--j", "1"];
    let short = ok_json(&d, &args);
    assert!(short["results"]["value"].as_str().unwrap().contains("use --full"));
    let mut full_args = args.to_vec();
    full_args.push("--full");
    let full = ok_json(&d, &full_args);
    assert!(full["results"]["value"].as_str().unwrap().bytes().all(|b| b.is_ascii_digit()));
}
