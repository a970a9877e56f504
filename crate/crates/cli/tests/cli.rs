use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

fn causavg(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_causavg"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

fn path(dir: &TempDir, name: &str) -> String {
    dir.path().join(name).to_str().unwrap().to_owned()
}

fn write(p: &str, text: &str) {
    std::fs::write(Path::new(p), text).unwrap();
}

#[test]
fn documented_exit_codes() {
    assert_eq!(code(&causavg(&["axioms", "--kernel", "exp:1", "--trials", "100", "--seed", "1"])), 0);
    assert_eq!(code(&causavg(&["falsify", "--kernel", "box:3", "--budget", "1000", "--seed", "1"])), 2);
    assert_eq!(code(&causavg(&["axioms", "--kernel", "box:3", "--trials", "100"])), 2);
    assert_eq!(code(&causavg(&["falsify", "--kernel", "exp:2", "--budget", "50"])), 0);
}

#[test]
fn matrix_prints_a_table() {
    let out = causavg(&["matrix", "--kernel", "exp:1", "--kernel", "box:1", "--trials", "50", "--budget", "50"]);
    assert_eq!(code(&out), 0);
    let text = String::from_utf8(out.stdout).unwrap();
    let rows: Vec<Vec<&str>> = text.lines().map(|l| l.split_whitespace().collect()).collect();
    assert_eq!(rows[0], ["kernel", "P1", "P2", "P3"]);
    assert_eq!(rows[1], ["exp:1", "✓", "✓", "✓"]);
    assert_eq!(rows[2], ["box:1", "✓", "✓", "✗"]);
}

#[test]
fn usage_and_operational_errors_exit_one() {
    let dir = TempDir::new().unwrap();
    let out = path(&dir, "g.csv");
    for args in [
        vec!["smooth", "--kernel", "exp:0", "--input", "x.csv", "--output", &out],
        vec!["smooth", "--kernel", "exp:1", "--input", "missing.csv", "--output", &out],
        vec!["falsify", "--kernel", "box:1", "--budget", "0"],
        vec!["nonsense"],
        vec!["reconstruct", "--delta", "1", "--C", "1", "--s-cutoff", "5"],
    ] {
        let o = causavg(&args);
        assert_eq!(code(&o), 1, "{args:?}");
        assert!(!o.stderr.is_empty());
    }
    assert_eq!(code(&causavg(&["--help"])), 0);
}

#[test]
fn falsify_reports_a_replayable_counterexample() {
    let out = causavg(&["falsify", "--kernel", "box:3", "--budget", "1000", "--seed", "1"]);
    let cx: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(cx["signal"]["values"], serde_json::json!([2.0, -3.0, 2.0]));
    assert_eq!((cx["count_f"].as_u64(), cx["count_g"].as_u64()), (Some(2), Some(3)));
    let none = causavg(&["falsify", "--kernel", "exp:1", "--budget", "20"]);
    assert_eq!(String::from_utf8(none.stdout).unwrap().trim(), "\"none\"");
}

#[test]
fn reruns_are_byte_identical() {
    for args in [
        vec!["axioms", "--kernel", "gamma:2,1", "--trials", "64", "--seed", "9"],
        vec!["falsify", "--kernel", "box:2", "--budget", "10"],
        vec!["gen", "steps", "--seed", "4", "--pieces", "6"],
        vec!["transform", "--kernel", "gamma:3,2", "--ds", "0.5"],
    ] {
        let (a, b) = (causavg(&args), causavg(&args));
        assert!(!a.stdout.is_empty());
        assert_eq!(a.stdout, b.stdout, "{args:?}");
    }
}

#[test]
fn smooth_writes_seventeen_digits() {
    let dir = TempDir::new().unwrap();
    let (input, output) = (path(&dir, "f.csv"), path(&dir, "g.csv"));
    write(&input, "t,value\n0,1\n0.5,1\n1,-1\n1.5,-1\n");
    let o = causavg(&["smooth", "--kernel", "exp:2", "--input", &input, "--output", &output, "--history", "zero"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let text = std::fs::read_to_string(&output).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "t,g");
    assert_eq!(lines.len(), 5);
    let mut g = Vec::new();
    for line in &lines[1..] {
        let (t, v) = line.split_once(',').unwrap();
        let mantissa = v.split('e').next().unwrap().trim_start_matches('-');
        assert_eq!(mantissa.chars().filter(char::is_ascii_digit).count(), 17);
        g.push((t.parse::<f64>().unwrap(), v.parse::<f64>().unwrap()));
    }
    // Zero history, unit step, rate 2: g(t) = 1 − e^{−2t} for t ≤ 1.
    assert_eq!(g[0], (0.0, 0.0));
    assert!((g[2].1 - (1.0 - (-2.0f64).exp())).abs() < 1e-15);
}

#[test]
fn streaming_matches_offline_output() {
    let dir = TempDir::new().unwrap();
    let (input, a, b) = (path(&dir, "f.csv"), path(&dir, "a.csv"), path(&dir, "b.csv"));
    assert_eq!(code(&causavg(&["gen", "--dt", "0.05", "--output", &input, "steps", "--seed", "2"])), 0);
    causavg(&["smooth", "--kernel", "exp:0.7", "--input", &input, "--output", &a]);
    causavg(&["smooth", "--kernel", "exp:0.7", "--input", &input, "--output", &b, "--stream"]);
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
    let o = causavg(&["smooth", "--kernel", "gamma:2,1", "--input", &input, "--output", &b, "--stream"]);
    assert_eq!(code(&o), 1);
}

#[test]
fn crossings_use_infinite_sentinels() {
    let dir = TempDir::new().unwrap();
    let input = path(&dir, "f.csv");
    write(&input, "t,value\n0,2\n1,-3\n2,2\n3,0\n");
    let o = causavg(&["crossings", "--input", &input, "--threshold", "1", "--threshold", "-5"]);
    assert_eq!(code(&o), 0);
    let v: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v[0]["count"], 2);
    assert_eq!(v[0]["intervals"][0], serde_json::json!(["-inf", 1.0]));
    assert_eq!(v[1]["intervals"][0], serde_json::json!(["-inf", "inf"]));

    let below = causavg(&["crossings", "--input", &input, "--threshold", "0.5", "--relation", "below"]);
    let v: Value = serde_json::from_slice(&below.stdout).unwrap();
    assert_eq!(v[0]["relation"], "below");
    assert_eq!(v[0]["intervals"], serde_json::json!([[1.0, 2.0], [3.0, "inf"]]));
}

#[test]
fn box_smoothing_adds_a_crossing() {
    let dir = TempDir::new().unwrap();
    let input = path(&dir, "f.csv");
    write(&input, "t,value\n0,2\n1,-3\n2,2\n3,0\n");
    let raw = causavg(&["crossings", "--input", &input, "--threshold", "0", "--history", "zero"]);
    let smoothed = causavg(&[
        "crossings", "--input", &input, "--smoothed", "--kernel", "box:3", "--threshold", "0", "--history", "zero",
    ]);
    let count = |o: &Output| serde_json::from_slice::<Value>(&o.stdout).unwrap()[0]["count"].as_u64().unwrap();
    assert_eq!((count(&raw), count(&smoothed)), (2, 3));
}

#[test]
fn file_kernels_load_from_csv() {
    let dir = TempDir::new().unwrap();
    let (kernel, input, output) = (path(&dir, "k.csv"), path(&dir, "f.csv"), path(&dir, "g.csv"));
    write(&kernel, "s,phi\n0,2\n0.5,1\n1,0\n");
    write(&input, "t,value\n0,3\n0.25,3\n0.5,3\n0.75,3\n");
    let spec = format!("file:{kernel}");
    assert_eq!(code(&causavg(&["smooth", "--kernel", &spec, "--input", &input, "--output", &output])), 0);
    let text = std::fs::read_to_string(&output).unwrap();
    for line in text.lines().skip(1) {
        let v: f64 = line.split_once(',').unwrap().1.parse().unwrap();
        assert!((v - 3.0).abs() < 1e-12, "{line}");
    }
    write(&kernel, "s,phi\n0,-1\n1,0\n");
    assert_eq!(code(&causavg(&["smooth", "--kernel", &spec, "--input", &input, "--output", &output])), 1);
}

#[test]
fn transform_flags_box_zeros() {
    let out = causavg(&["transform", "--kernel", "box:1", "--s-min", "0", "--s-max", "12.566370614359172", "--ds", "3.141592653589793"]);
    assert_eq!(code(&out), 0);
    let text = String::from_utf8(out.stdout).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "s,re,im,psi_abs,zero_flag");
    let flags: Vec<&str> = lines[1..].iter().map(|l| l.rsplit(',').next().unwrap()).collect();
    assert_eq!(flags, ["0", "0", "1", "0", "1"]);
    assert!(lines[3].contains(",inf,"));
}

#[test]
fn reconstruct_reports_max_error() {
    let dir = TempDir::new().unwrap();
    let output = path(&dir, "r.csv");
    let o = causavg(&["reconstruct", "--delta", "0.5", "--C", "2", "--xmax", "2", "--output", &output]);
    assert_eq!(code(&o), 0);
    let stdout = String::from_utf8(o.stdout).unwrap();
    let err: f64 = stdout.trim().strip_prefix("max_rel_error,").unwrap().parse().unwrap();
    assert!(err < 1e-3, "{err}");
    let csv = std::fs::read_to_string(&output).unwrap();
    assert!(csv.starts_with("x,phi2,reference\n"));
    assert_eq!(csv.lines().count(), 402);
}
