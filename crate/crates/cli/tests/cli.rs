use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn lab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_nonlocal-lab")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn value<'a>(text: &'a str, key: &str) -> Option<&'a str> {
    text.lines().find_map(|l| l.strip_prefix(key)?.strip_prefix('='))
}

const GOLDEN_ARGS: [&str; 8] =
    ["sweep", "--d", "2", "--s-range", "0.3:0.6:2", "--delta-range", "0.1,0.3", "--epsilon=0.2"];

#[test]
fn couple_at_zero_delta() {
    let o = lab(&["couple", "--d", "2", "--s", "0.5", "--delta", "0"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(value(&stdout(&o), "epsilon"), Some("0"));
}

#[test]
fn couple_inverse_round_trips() {
    let o = lab(&["couple", "--d", "3", "--s", "0.5", "--delta", "0.05"]);
    let eps = value(&stdout(&o), "epsilon").unwrap().to_string();
    let o = lab(&["couple", "--d", "3", "--s", "0.5", "--inverse", "--epsilon", &eps]);
    assert_eq!(o.status.code(), Some(0));
    let delta: f64 = value(&stdout(&o), "delta").unwrap().parse().unwrap();
    assert!((delta - 0.05).abs() < 1e-10, "{delta}");
}

#[test]
fn planar_riesz_coupling_is_delta() {
    let o = lab(&["riesz", "--d", "2", "--delta", "0.3"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(value(&stdout(&o), "coupling"), Some("0.3"));
}

#[test]
fn verify_passes_at_the_coupling() {
    let o = lab(&["verify", "--d", "2", "--s", "0.5", "--delta", "0.1"]);
    assert_eq!(o.status.code(), Some(0));
    let r: f64 = value(&stdout(&o), "residual").unwrap().parse().unwrap();
    assert!(r <= 1e-3);
}

#[test]
fn exit_codes() {
    // argument errors
    assert_eq!(lab(&["couple", "--d", "2"]).status.code(), Some(2));
    assert_eq!(lab(&["frobnicate"]).status.code(), Some(2));
    assert_eq!(
        lab(&["sweep", "--d", "2", "--s-range", "1:2", "--delta-range", "0.1"]).status.code(),
        Some(2)
    );
    // domain errors
    assert_eq!(lab(&["couple", "--d", "2", "--s", "1.5", "--delta", "0.1"]).status.code(), Some(2));
    assert_eq!(lab(&["riesz", "--d", "7", "--delta", "1.3"]).status.code(), Some(2));
    assert_eq!(
        lab(&["fourier", "--which", "f1", "--d", "2", "--s", "0.5", "--delta", "0.9"]).status.code(),
        Some(2)
    );
    // tolerance and i/o failures
    assert_eq!(
        lab(&["verify", "--d", "2", "--s", "0.5", "--delta", "0.1", "--tol", "0"]).status.code(),
        Some(1)
    );
    let o = lab(&[
        "sweep",
        "--d",
        "2",
        "--s-range",
        "0.5",
        "--delta-range",
        "0.1",
        "--out",
        "/nonexistent-dir/out.csv",
    ]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("/nonexistent-dir/out.csv"));
}

#[test]
fn sweep_matches_golden_file() {
    let dir = tempfile::tempdir().unwrap();
    let golden = fs::read(Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/golden/sweep_d2.csv")).unwrap();
    for name in ["a.csv", "b.csv"] {
        let out = dir.path().join(name);
        let mut args = GOLDEN_ARGS.to_vec();
        let p = out.to_str().unwrap();
        args.extend(["--out", p]);
        assert_eq!(lab(&args).status.code(), Some(0));
        assert_eq!(fs::read(&out).unwrap(), golden, "{name} differs from the golden file");
    }
    let leftovers: Vec<_> = fs::read_dir(dir.path()).unwrap().collect();
    assert_eq!(leftovers.len(), 2);
}

#[test]
fn sweep_json_has_flat_records() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("r.json");
    let mut args = GOLDEN_ARGS.to_vec();
    args.extend(["--format", "json", "--out", out.to_str().unwrap()]);
    assert_eq!(lab(&args).status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_str(&fs::read_to_string(&out).unwrap()).unwrap();
    let rows = v.as_array().unwrap();
    assert_eq!(rows.len(), 4);
    assert_eq!(rows[0]["seed"], 42);
    assert_eq!(rows[3]["epsilon"].as_f64(), Some(0.2));
}

#[test]
fn config_file_merges_under_flags() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.cfg");
    fs::write(&cfg, "# planar run\nd = 2\ns = 0.5\ndelta = 0.3\n").unwrap();
    let cfg = cfg.to_str().unwrap();

    let o = lab(&["--config", cfg, "couple"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(value(&stdout(&o), "delta"), Some("0.3"));

    let o = lab(&["couple", "--config", cfg, "--delta", "0"]);
    assert_eq!(value(&stdout(&o), "epsilon"), Some("0"));

    fs::write(dir.path().join("bad.cfg"), "nonsense-key = 1\n").unwrap();
    let bad = dir.path().join("bad.cfg");
    assert_eq!(lab(&["--config", bad.to_str().unwrap(), "couple"]).status.code(), Some(2));
}

#[test]
fn json_output_parses() {
    let o = lab(&["--json", "fourier", "--which", "f2", "--d", "3", "--s", "0.5", "--delta", "0.3"]);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert!(v["rel_err"].as_f64().unwrap() < 1e-10);
}

#[test]
fn regularity_reports_verdict() {
    let o = lab(&["regularity", "--delta", "0.4", "--t", "0.9", "--q", "8"]);
    assert_eq!(o.status.code(), Some(0));
    let s = stdout(&o);
    assert_eq!(value(&s, "member"), Some("false"));
    assert_eq!(value(&s, "verdict"), Some("diverging"));
}
