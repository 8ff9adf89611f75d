use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn skcap(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_skcap"))
        .args(args)
        .env_remove("SKCAP_THREADS")
        .output()
        .expect("binary runs")
}

fn stdout_json(o: &Output) -> Value {
    serde_json::from_slice(&o.stdout).expect("json on stdout")
}

fn csv_rows(path: &Path) -> Vec<csv::StringRecord> {
    csv::Reader::from_path(path).unwrap().records().map(|r| r.unwrap()).collect()
}

fn field(r: &csv::StringRecord, i: usize) -> f64 {
    r[i].parse().unwrap()
}

/// S, X binary; Y is X through a BSC(0.2); Z is an exact copy of Y.
fn copy_channel_file(dir: &Path) -> std::path::PathBuf {
    let mut t = vec![vec![vec![vec![0.0; 2]; 2]; 2]; 2];
    for s in 0..2 {
        for x in 0..2 {
            let px = if x == s { 0.9 } else { 0.1 };
            for y in 0..2 {
                t[s][x][y][y] = px * if y == x { 0.8 } else { 0.2 };
            }
        }
    }
    let text = serde_json::json!({
        "alphabets": {"S": 2, "X": 2, "Y": 2, "Z": 2},
        "transition": t,
    });
    let path = dir.join("copy.json");
    std::fs::write(&path, text.to_string()).unwrap();
    path
}

#[test]
fn onoff_capacity_splits_exactly() {
    let o = skcap(&["capacity", "--family", "binary-onoff"]);
    assert!(o.status.success());
    let v = stdout_json(&o);
    let beta = v["beta_star"].as_f64().unwrap();
    assert!((0.0..=1.0).contains(&beta));
    let c = v["capacity_bits"].as_f64().unwrap();
    let split = v["r_ch"].as_f64().unwrap() + v["r_src"].as_f64().unwrap();
    assert!((c - split).abs() <= 1e-9);
    assert_eq!(v["physically_degraded"], false);
    assert_eq!(v["self_check_passed"], true);
}

#[test]
fn eavesdropper_copy_of_legitimate_output_gives_zero_capacity() {
    let dir = tempfile::tempdir().unwrap();
    let file = copy_channel_file(dir.path());
    let o = skcap(&["capacity", "--channel", file.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let v = stdout_json(&o);
    assert_eq!(v["upper_bound_only"], false);
    assert!(v["capacity_bits"].as_f64().unwrap().abs() <= 1e-9);
    let u = stdout_json(&skcap(&["upper-bound", "--channel", file.to_str().unwrap()]));
    assert!(u["value"].as_f64().unwrap().abs() <= 1e-9);
}

#[test]
fn malformed_channel_file_is_an_error() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.json");
    std::fs::write(&path, r#"{"alphabets": {"S":1,"X":1,"Y":1,"Z":1}, "transition": [[[[0.5]]]]}"#).unwrap();
    let o = skcap(&["capacity", "--channel", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    let ok = skcap(&["capacity", "--channel", path.to_str().unwrap(), "--renormalize"]);
    assert!(ok.status.success());
}

#[test]
fn gaussian_sweep_is_monotone_with_a_source_crossover() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("g.csv");
    let o = skcap(&["sweep-gaussian", "--out", out.to_str().unwrap()]);
    assert!(o.status.success());
    let rows = csv_rows(&out);
    assert_eq!(rows.len(), 61);
    for w in rows.windows(2) {
        assert!(field(&w[1], 2) >= field(&w[0], 2) - 1e-12);
    }
    for r in &rows {
        assert!((field(r, 2) - field(r, 3) - field(r, 4)).abs() <= 1e-9);
    }
    // The source term is power independent, so the channel term overtakes it.
    assert!(field(&rows[0], 3) < field(&rows[0], 4));
    assert!(field(&rows[60], 3) > field(&rows[60], 4));
}

#[test]
fn binary_sweep_marks_one_argmax_near_the_optimum() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("b.csv");
    assert!(skcap(&["sweep-binary", "--points", "101", "--out", out.to_str().unwrap()]).status.success());
    let rows = csv_rows(&out);
    assert_eq!(rows.len(), 101);
    let marked: Vec<_> = rows.iter().filter(|r| &r[4] == "true").collect();
    assert_eq!(marked.len(), 1);
    let best = rows.iter().map(|r| field(r, 1)).fold(f64::MIN, f64::max);
    assert_eq!(field(marked[0], 1), best);
    let summary: Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("b.summary.json")).unwrap()).unwrap();
    let refined = summary["refined_optimum"]["beta_star"].as_f64().unwrap();
    assert!((refined - field(marked[0], 0)).abs() <= 0.01);
    assert!(summary["refined_optimum"]["capacity_bits"].as_f64().unwrap() >= best - 1e-12);
}

#[test]
fn exponents_vanish_at_zero_rates_for_a_single_point_input() {
    let o = skcap(&[
        "exponents", "--family", "binary-onoff", "--input", "1,0", "--format", "json",
    ]);
    assert!(o.status.success());
    let v = stdout_json(&o);
    assert_eq!(v.as_array().unwrap().len(), 1);
    assert!(v[0]["e_o"].as_f64().unwrap().abs() <= 1e-12);
}

#[test]
fn exponent_grid_passes_monotonicity_checks() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("e.csv");
    let o = skcap(&[
        "exponents", "--family", "random-degraded", "--channel-seed", "3", "--beta", "0.1:0.9:0.2",
        "--r-sk", "0,0.1", "--r-phi", "0:0.4:0.2", "--r-m", "0,0.3", "--out", out.to_str().unwrap(),
    ]);
    assert!(o.status.success());
    assert_eq!(csv_rows(&out).len(), 5 * 2 * 3 * 2);
    let s: Value = serde_json::from_str(&std::fs::read_to_string(dir.path().join("e.summary.json")).unwrap()).unwrap();
    assert_eq!(s["self_check_passed"], true);
    assert!(s.get("f_o_convex_in_beta").is_some());
}

#[test]
fn constant_key_simulation_has_no_error_or_leakage() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("s.csv");
    let o = skcap(&[
        "simulate", "--family", "binary-onoff", "--n", "1:2", "--codebooks", "20", "--out", out.to_str().unwrap(),
    ]);
    assert!(o.status.success());
    let rows = csv_rows(&out);
    assert_eq!(rows.len(), 40);
    for r in &rows {
        assert_eq!(field(r, 3), 0.0);
    }
}

#[test]
fn single_letter_ensemble_respects_the_bounds() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("s.csv");
    let o = skcap(&[
        "simulate", "--family", "random-degraded", "--channel-seed", "7", "--n", "1", "--r-sk", "1", "--r-phi",
        "1", "--r-m", "1", "--codebooks", "500", "--seed", "11", "--out", out.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(csv_rows(&out).len(), 500);
    let b: Value = serde_json::from_str(&std::fs::read_to_string(dir.path().join("s.bounds.json")).unwrap()).unwrap();
    assert_eq!(b["bound_check"], "pass");
}

#[test]
fn simulation_output_is_byte_identical_for_a_seed() {
    let dir = tempfile::tempdir().unwrap();
    let run = |name: &str, threads: &str| {
        let out = dir.path().join(name);
        let o = Command::new(env!("CARGO_BIN_EXE_skcap"))
            .args(["simulate", "--family", "random", "--channel-seed", "2", "--n", "1:3", "--r-sk", "0.3"])
            .args(["--r-phi", "0.3", "--r-m", "0.3", "--codebooks", "40", "--seed", "5", "--out"])
            .arg(&out)
            .env("SKCAP_THREADS", threads)
            .output()
            .unwrap();
        assert!(o.status.code() == Some(0) || o.status.code() == Some(1));
        std::fs::read(out).unwrap()
    };
    let a = run("a.csv", "1");
    assert_eq!(a, run("b.csv", "1"));
    assert_eq!(a, run("c.csv", "2"));
}

#[test]
fn oversized_enumeration_is_refused() {
    let o = skcap(&[
        "simulate", "--family", "random", "--alphabets", "2,2,8,8", "--n", "12", "--r-sk", "0.5", "--codebooks",
        "1",
    ]);
    assert_eq!(o.status.code(), Some(2));
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("^n"), "{err}");
}

#[test]
fn verify_bounds_passes_on_a_degraded_channel() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("v.csv");
    let o = skcap(&[
        "verify-bounds", "--family", "random-degraded", "--channel-seed", "7", "--n", "1:2", "--r-sk", "0.3",
        "--r-phi", "0.3", "--r-m", "0.3", "--codebooks", "100", "--out", out.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0));
    let rows = csv_rows(&out);
    assert_eq!(rows.len(), 2 * (20 + 2));
    assert!(rows.iter().all(|r| &r[5] == "true"));
}

#[test]
fn thread_count_comes_from_the_environment() {
    let o = Command::new(env!("CARGO_BIN_EXE_skcap"))
        .args(["capacity", "--family", "gaussian"])
        .env("SKCAP_THREADS", "not-a-number")
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(2));
}
