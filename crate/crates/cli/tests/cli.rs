use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn qctree(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qctree"))
        .args(args)
        .current_dir(dir)
        .env_remove("QCTREE_OUT_DIR")
        .output()
        .expect("binary runs")
}

fn read(dir: &Path, name: &str) -> Value {
    serde_json::from_str(&fs::read_to_string(dir.join(name)).unwrap()).unwrap()
}

fn gen_tree(dir: &Path, kind: &str, k: &str, out: &str) {
    let o = qctree(dir, &["arc", "gen", "--kind", kind, "--resolution", k, "--out", out, "--no-timestamp"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
}

#[test]
fn roundtrip_on_euclidean_arc_is_exact() {
    let dir = tempfile::tempdir().unwrap();
    gen_tree(dir.path(), "euclidean", "5", "euclid.json");
    let o = qctree(
        dir.path(),
        &["mart", "roundtrip", "--tree", "euclid.json", "--trials", "10", "--seed", "1", "--report", "rt.json"],
    );
    assert_eq!(o.status.code(), Some(0));
    let r = read(dir.path(), "rt.json");
    assert_eq!(r["measured"]["max_error_i_of_d"], "0");
    assert_eq!(r["measured"]["max_error_d_of_i"], "0");
    assert_eq!(r["pass"], true);
}

#[test]
fn snowflake_check_records_ratio_one() {
    let dir = tempfile::tempdir().unwrap();
    gen_tree(dir.path(), "snowflake", "5", "snowflake.json");
    let o = qctree(dir.path(), &["arc", "check", "--tree", "snowflake.json", "--report", "check.json"]);
    assert_eq!(o.status.code(), Some(0));
    let r = read(dir.path(), "check.json");
    assert_eq!(r["measured"]["bounded_turning_ratio"], "1");
    assert_eq!(r["measured"]["doubling_index"], 2);
}

#[test]
fn star_decomposition_validates() {
    let dir = tempfile::tempdir().unwrap();
    let o = qctree(dir.path(), &["tree", "gen", "--kind", "star", "--arcs", "3", "--out", "star3.json"]);
    assert_eq!(o.status.code(), Some(0));
    let o = qctree(dir.path(), &["tree", "decompose", "--plan", "star3.json", "--depth", "3", "--report", "dec.json"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let r = read(dir.path(), "dec.json");
    assert_eq!(r["pass"], true);
    // each arm is a unit Euclidean arc: leaf distances are 2 and the arms are geodesic
    assert_eq!(r["measured"]["arc_constants"]["c3"], "1");
    assert!(dir.path().join("dec.arcs.csv").exists());
}

#[test]
fn reports_are_byte_identical_without_timestamp() {
    let dir = tempfile::tempdir().unwrap();
    gen_tree(dir.path(), "snowflake", "4", "s.json");
    let run = |name: &str| {
        let o = qctree(
            dir.path(),
            &[
                "mart",
                "roundtrip",
                "--tree",
                "s.json",
                "--seed",
                "9",
                "--trials",
                "4",
                "--no-timestamp",
                "--report",
                name,
            ],
        );
        assert_eq!(o.status.code(), Some(0));
        fs::read(dir.path().join(name)).unwrap()
    };
    let (a, b) = (run("a.json"), run("a.json"));
    assert_eq!(a, b);
    let l = |name: &str| {
        qctree(dir.path(), &["l1iso", "bench", "--seed", "2", "--sizes", "4,6", "--no-timestamp", "--report", name]);
        (fs::read(dir.path().join(name)).unwrap(), fs::read(dir.path().join("l1.sizes.csv")).unwrap())
    };
    assert_eq!(l("l1.json"), l("l1.json"));
}

#[test]
fn input_errors_exit_3() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(qctree(dir.path(), &["arc", "check", "--tree", "missing.json"]).status.code(), Some(3));
    assert_eq!(qctree(dir.path(), &["arc", "frobnicate"]).status.code(), Some(3));
    gen_tree(dir.path(), "euclidean", "3", "e.json");
    // randomized command without a seed
    assert_eq!(qctree(dir.path(), &["mart", "roundtrip", "--tree", "e.json"]).status.code(), Some(3));
    // off-grid point
    assert_eq!(
        qctree(dir.path(), &["arc", "dist", "--tree", "e.json", "--x", "1/3", "--y", "1"]).status.code(),
        Some(3)
    );
    fs::write(dir.path().join("f.json"), r#"["0", "1/2"]"#).unwrap();
    assert_eq!(qctree(dir.path(), &["mart", "d", "--tree", "e.json", "--f", "f.json"]).status.code(), Some(3));
    assert_eq!(qctree(dir.path(), &["--help"]).status.code(), Some(0));
}

#[test]
fn function_files_accept_decimals_and_fractions() {
    let dir = tempfile::tempdir().unwrap();
    gen_tree(dir.path(), "euclidean-raw", "2", "raw.json");
    fs::write(dir.path().join("f.json"), r#"["0", "0.25", "1/2", "0.75", "1"]"#).unwrap();
    let o = qctree(
        dir.path(),
        &["mart", "d", "--tree", "raw.json", "--f", "f.json", "--out", "seq.json", "--report", "d.json"],
    );
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(read(dir.path(), "d.json")["measured"]["lipschitz_norm"], "1");
    let o = qctree(
        dir.path(),
        &["mart", "i", "--tree", "raw.json", "--seq", "seq.json", "--out", "g.json", "--report", "i.json"],
    );
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(read(dir.path(), "g.json"), serde_json::json!(["0", "1/4", "1/2", "3/4", "1"]));
}

#[test]
fn out_dir_variable_redirects_relative_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("reports");
    let o = Command::new(env!("CARGO_BIN_EXE_qctree"))
        .args(["arc", "gen", "--kind", "euclidean", "--resolution", "3", "--out", "t.json", "--report", "gen.json"])
        .current_dir(dir.path())
        .env("QCTREE_OUT_DIR", &out)
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(0));
    assert!(out.join("t.json").exists() && out.join("gen.json").exists());
}
