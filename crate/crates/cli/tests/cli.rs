use std::path::PathBuf;
use std::process::{Command, Output};

use kawastar_core::search::{sweep_table, ParameterRule};
use kawastar_core::AssemblyMode;
use serde_json::Value;

fn configs() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../configs")
}

fn kawastar(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_kawastar"))
        .args(args)
        .env_remove("KAWASTAR_THREADS")
        .output()
        .expect("binary runs")
}

fn config(name: &str) -> String {
    configs().join(name).to_string_lossy().into_owned()
}

fn stdout_json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| panic!("{e}: {}", String::from_utf8_lossy(&out.stdout)))
}

fn write_temp(dir: &tempfile::TempDir, name: &str, body: &str) -> String {
    let p = dir.path().join(name);
    std::fs::write(&p, body).unwrap();
    p.to_string_lossy().into_owned()
}

#[test]
fn det_on_the_y_junction() {
    let out = kawastar(&["det", "--config", &config("y-junction.json"), "--mode", "appendix-code"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let v = stdout_json(&out);
    assert_eq!(v["schema"], 1);
    assert_eq!(v["verdict"], "invertible");
    let nd = v["normalized_determinant"].as_f64().unwrap();
    assert!((nd + 9.2205).abs() <= 5e-3 * 9.2205, "{nd}");
    assert!(v["condition_estimate"].as_f64().unwrap() >= 1.0);
}

#[test]
fn det_exits_2_when_singular() {
    // beta columns equal on each edge: duplicate theta columns.
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_temp(
        &dir,
        "singular.json",
        r#"{"k":1,"m":2,"a":[1,1,1],"b":[1,1,1],"C":[[0.7071067811865476,0.7071067811865476]],
            "lambda":[[0.48,0.32,0.16]],"beta":[[0.48,0.48],[0.23,0.23]]}"#,
    );
    let out = kawastar(&["det", "--config", &cfg]);
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(stdout_json(&out)["verdict"], "singular");
}

#[test]
fn malformed_input_exits_1() {
    let dir = tempfile::tempdir().unwrap();
    let broken = write_temp(&dir, "broken.json", "{\"k\": 1,");
    assert_eq!(kawastar(&["det", "--config", &broken]).status.code(), Some(1));

    let zero = write_temp(
        &dir,
        "zero.json",
        r#"{"k":1,"m":1,"a":[1,0],"b":[1,1],"C":[[1]],"lambda":[[0.3,0.2,0.1]],"beta":[[0.3,0.1]]}"#,
    );
    let out = kawastar(&["det", "--config", &zero]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("zero coefficient a_2"));

    assert_eq!(kawastar(&["det", "--config", "/nonexistent/graph.json"]).status.code(), Some(1));
    assert_eq!(kawastar(&["det"]).status.code(), Some(1));
    assert_eq!(kawastar(&["kernel", "--x", "80"]).status.code(), Some(1));
}

#[test]
fn sweep_matches_the_table_and_round_trips() {
    let out = kawastar(&["sweep", "--kmax", "10", "--mmax", "10", "--mode", "appendix-code"]);
    assert_eq!(out.status.code(), Some(0));
    let mut reader = csv::Reader::from_reader(out.stdout.as_slice());
    assert_eq!(reader.headers().unwrap(), vec!["k", "m", "normalized_det", "mode"]);
    let fresh = sweep_table(10, 10, ParameterRule::default(), AssemblyMode::AppendixCode).unwrap();
    let mut n = 0;
    for (rec, row) in reader.records().zip(&fresh.rows) {
        let rec = rec.unwrap();
        assert_eq!(rec[0].parse::<usize>().unwrap(), row.k);
        assert_eq!(rec[1].parse::<usize>().unwrap(), row.m);
        let v: f64 = rec[2].parse().unwrap();
        assert!((v - row.normalized_det).abs() <= 5e-6 * row.normalized_det.abs());
        assert_eq!(&rec[3], "appendix-code");
        n += 1;
    }
    assert_eq!(n, 100);
    let first = String::from_utf8_lossy(&out.stdout).lines().nth(1).unwrap().to_string();
    assert!(first.starts_with("1,1,-3.627"), "{first}");
}

#[test]
fn sweep_is_thread_count_independent() {
    let base = kawastar(&["sweep", "--kmax", "6", "--mmax", "6"]).stdout;
    let serial = Command::new(env!("CARGO_BIN_EXE_kawastar"))
        .args(["sweep", "--kmax", "6", "--mmax", "6"])
        .env("KAWASTAR_THREADS", "1")
        .output()
        .unwrap();
    assert_eq!(serial.status.code(), Some(0));
    assert_eq!(serial.stdout, base);

    let bad = Command::new(env!("CARGO_BIN_EXE_kawastar"))
        .args(["sweep", "--kmax", "2", "--mmax", "2"])
        .env("KAWASTAR_THREADS", "many")
        .output()
        .unwrap();
    assert_eq!(bad.status.code(), Some(1));
}

#[test]
fn sweep_json_is_versioned() {
    let out = kawastar(&["sweep", "--kmax", "2", "--mmax", "2", "--format", "json"]);
    let v = stdout_json(&out);
    assert_eq!(v["schema"], 1);
    assert_eq!(v["rows"].as_array().unwrap().len(), 4);
}

#[test]
fn admissible_second_example() {
    let v = stdout_json(&kawastar(&["admissible", "--config", &config("y-junction-narrow.json")]));
    assert!((v["lo"].as_f64().unwrap() + 0.01).abs() < 1e-12);
    assert!((v["hi"].as_f64().unwrap() - 2.40).abs() < 1e-12);
    assert_eq!(v["excluded"], serde_json::json!([0.5, 1.5]));
}

#[test]
fn search_and_its_failure_mode() {
    let out = kawastar(&["search", "--config", &config("y-junction.json"), "--det-floor", "1e-4", "--budget", "10000"]);
    assert_eq!(out.status.code(), Some(0));
    let v = stdout_json(&out);
    let r = &v["certified_range"];
    assert!(r["hi"].as_f64().unwrap() - r["lo"].as_f64().unwrap() >= 2.41);
    assert!(v["evaluations"].as_u64().unwrap() <= 10_000);

    let out = kawastar(&["search", "--config", &config("y-junction.json"), "--det-floor", "1e10", "--budget", "500"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("no invertible point found"));
}

#[test]
fn compat_reports_violations_with_exit_3() {
    let dir = tempfile::tempdir().unwrap();
    let graph = write_temp(
        &dir,
        "graph.json",
        r#"{"k":1,"m":2,"a":[1,1,1],"b":[1,2,1],"C":[[0.5,0.5]],"lambda":[[0.3,0.2,0.1]],"beta":[[0.3,0.1],[0.3,0.1]]}"#,
    );
    let traces = write_temp(&dir, "tr.json", r#"{"value":[2,2,2],"deriv":[2,2,2]}"#);
    let out = kawastar(&["compat", "--config", &graph, "--s", "2", "--traces", &traces]);
    assert_eq!(out.status.code(), Some(3));
    let v = stdout_json(&out);
    assert_eq!(v["pass"], false);
    assert_eq!(v["violations"][0]["kind"], "deriv");
    assert_eq!(v["violations"][0]["edge"], 2);

    let ok = kawastar(&["compat", "--config", &graph, "--s", "0.3", "--traces", &traces]);
    assert_eq!(ok.status.code(), Some(0));
}

#[test]
fn verify_suites_pass() {
    for suite in ["trig", "kernel"] {
        let out = kawastar(&["verify", "--suite", suite]);
        assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
        let v = stdout_json(&out);
        assert_eq!(v["pass"], true);
        assert!(String::from_utf8_lossy(&out.stderr).lines().all(|l| l.starts_with("pass")));
    }
}

#[test]
fn kernel_value_and_output_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("b0.json");
    let out = kawastar(&["kernel", "--x", "0", "--output", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    assert!(out.stdout.is_empty());
    let v: Value = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    assert!((v["value"].as_f64().unwrap() - 0.277_957_858_260_206_76).abs() < 1e-10);

    let neg = stdout_json(&kawastar(&["kernel", "--x", "-3"]));
    assert!(neg["value"].as_f64().unwrap().is_finite());
}
