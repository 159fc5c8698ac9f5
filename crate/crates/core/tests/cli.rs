use serde_json::Value;
use std::path::Path;
use std::process::{Command, Output};

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_orthoseries"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn path(p: &Path) -> &str {
    p.to_str().expect("utf-8 temp path")
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

#[test]
fn decompose_prints_blocks() {
    let out = run(&["decompose", "5", "3"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(String::from_utf8_lossy(&out.stdout).trim(), "(0,4] (4,5]");

    let out = run(&["decompose", "5", "2"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).starts_with("error:"));
}

#[test]
fn usage_errors_exit_2() {
    assert_eq!(run(&["no-such-command"]).status.code(), Some(2));
    assert_eq!(run(&["check-mr"]).status.code(), Some(2));
    assert_eq!(run(&["check-mr", "--powerlog", "1,1"]).status.code(), Some(2));
    assert_eq!(run(&["--help"]).status.code(), Some(0));
}

#[test]
fn condition_reports() {
    let out = run(&["check-mr", "--powerlog", "1,1,2", "--trunc", "4096"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert_eq!(v["classification"], "Converges");
    assert_eq!(v["truncation_length"], 4096);

    let out = run(&["check-orlicz", "--powerlog", "1,1,2", "--logpower", "1.5"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert_eq!(v["all_hold"], true);
    assert!(v["lhs"].as_f64().unwrap() <= v["middle"].as_f64().unwrap() * (1.0 + 1e-12));

    let out = run(&["check-tandori", "--powerlog", "1,0.5,0", "--trunc", "2"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn generated_system_round_trips_through_majorant() {
    let dir = tempfile::tempdir().unwrap();
    for (format, field, file) in [("json", "complex", "sys.json"), ("csv", "real", "sys.csv")] {
        let sys = dir.path().join(file);
        let out = run(&[
            "gen-ons",
            "--kind",
            "random-qr",
            "--n",
            "12",
            "--fiber-dim",
            "2",
            "--field",
            field,
            "--format",
            format,
            "--out",
            path(&sys),
        ]);
        assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
        for plan in ["identity", "shuffle", "greedy", "reversal"] {
            let out = run(&[
                "majorant",
                "--system",
                path(&sys),
                "--powerlog",
                "1,1,0",
                "--plan",
                plan,
            ]);
            assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
            let v = json(&out);
            assert_eq!(v["ons_valid"], true);
            assert_eq!(v["n"], 12);
            let b2: f64 = (1..=12).map(|n| 1.0 / (n * n) as f64).sum();
            let rhs = (2.0 + 12f64.log2()) * b2.sqrt();
            assert!(v["profile"]["l2_norm"].as_f64().unwrap() <= rhs);
        }
    }
}

#[test]
fn explicit_coefficients_from_file() {
    let dir = tempfile::tempdir().unwrap();
    let sys = dir.path().join("basis.json");
    let coeffs = dir.path().join("a.txt");
    std::fs::write(&coeffs, "3\n4\n").unwrap();
    let out = run(&["gen-ons", "--kind", "standard-basis", "--n", "2", "--out", path(&sys)]);
    assert_eq!(out.status.code(), Some(0));
    let out = run(&["majorant", "--system", path(&sys), "--coeffs", path(&coeffs)]);
    let v = json(&out);
    assert_eq!(v["profile"]["values"], serde_json::json!([3.0, 4.0]));
}

#[test]
fn malformed_inputs_are_reported() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.csv");
    std::fs::write(&bad, "element,atom,weight,dim,c0\nx,0,1,1,1\n").unwrap();
    let out = run(&["majorant", "--system", path(&bad), "--powerlog", "1,1,0"]);
    assert_eq!(out.status.code(), Some(2));
    let msg = String::from_utf8_lossy(&out.stderr);
    assert!(msg.contains("bad.csv") && msg.contains("line 2"), "{msg}");

    let cfg = dir.path().join("cfg.json");
    std::fs::write(&cfg, "{\"n_trials\": 1,\n").unwrap();
    let out = run(&["verify", "--config", path(&cfg)]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("cfg.json"));
}

#[test]
fn verify_reports_failures_with_exit_1() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("cfg.json");
    let report = dir.path().join("report.json");
    let config = serde_json::json!({
        "system_spec": {"kind": "haar", "n_functions": 8, "resolution": 8, "fiber_dim": 1, "seed": 0, "field": "real"},
        "n_trials": 2,
        "checks": ["lemma1"],
        "tolerances": {"lemma1": -0.9}
    });
    std::fs::write(&cfg, config.to_string()).unwrap();
    let out = run(&["verify", "--config", path(&cfg), "--out", path(&report)]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("FAIL lemma1"));
    let v: Value = serde_json::from_str(&std::fs::read_to_string(&report).unwrap()).unwrap();
    assert_eq!(v["passed"], false);
    assert!(v["checks"][0]["labels"][0]["worst"]["seed"].is_u64());

    let out = run(&["verify", "--config", path(&cfg), "--check", "oracle"]);
    assert_eq!(out.status.code(), Some(0));
}
