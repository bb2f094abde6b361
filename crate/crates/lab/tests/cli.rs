use std::process::{Command, Output};

fn horolab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_horolab")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    assert!(o.status.success(), "stderr: {}", String::from_utf8_lossy(&o.stderr));
    String::from_utf8(o.stdout.clone()).unwrap()
}

const XI: &str = "1,0,1.4142135623730951,1";

#[test]
fn experiment_csv_header() {
    let out = stdout(&horolab(&["discrepancy", "--g", XI, "--T", "1000,3000", "--weight", "nu", "--R", "50"]));
    let mut lines = out.lines();
    assert_eq!(lines.next(), Some("T,s,weight,sum,integral,discrepancy,r,yT,bound,theta,beta,R"));
    let rows: Vec<&str> = lines.collect();
    assert_eq!(rows.len(), 2);
    assert!(rows[0].starts_with("1000.0,1.0,nu,"));
    assert!(rows[1].ends_with(",50.0"));

    let out = stdout(&horolab(&["venkatesh", "--g", XI, "--T", "5000", "--s", "4,1"]));
    let rows: Vec<&str> = out.lines().skip(1).collect();
    assert!(rows[0].starts_with("5000.0,1.0,uniform") && rows[1].starts_with("5000.0,4.0,uniform"));
}

#[test]
fn exit_codes() {
    assert_eq!(horolab(&["approx", "--g", XI, "--T", "2"]).status.code(), Some(2));
    assert_eq!(horolab(&["sw-check", "--R", "20", "--len", "1000"]).status.code(), Some(2));
    assert_eq!(horolab(&["orbit-sum", "--T", "100", "--f", "cosine"]).status.code(), Some(2));
    assert_eq!(horolab(&["reduce"]).status.code(), Some(2));
    assert_eq!(horolab(&["frobnicate"]).status.code(), Some(2));
    assert_eq!(horolab(&["discrepancy", "--T", "1e9", "--weight", "nu"]).status.code(), Some(3));
    assert_eq!(horolab(&["reduce", "--z", "0.3,0.1"]).status.code(), Some(0));
}

#[test]
fn config_file_and_override() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("run.json");
    std::fs::write(
        &path,
        format!(r#"{{"g": "{XI}", "T": 1000, "weight": "nu", "R": 30, "f": "angular", "theta": 0.2}}"#),
    )
    .unwrap();
    let cfg = path.to_str().unwrap();
    let out = stdout(&horolab(&["discrepancy", "--config", cfg]));
    let row: Vec<&str> = out.lines().nth(1).unwrap().split(',').collect();
    assert_eq!((row[0], row[2], row[4], row[9], row[11]), ("1000.0", "nu", "0.0", "0.2", "30.0"));

    let out = stdout(&horolab(&["discrepancy", "--config", cfg, "--T", "2000,4000", "--R", "40"]));
    let rows: Vec<Vec<&str>> = out.lines().skip(1).map(|l| l.split(',').collect()).collect();
    assert_eq!(rows.len(), 2);
    assert_eq!((rows[0][0], rows[1][0], rows[0][2], rows[0][11]), ("2000.0", "4000.0", "nu", "40.0"));

    std::fs::write(&path, r#"{"T": 1000, "colour": "red"}"#).unwrap();
    assert_eq!(horolab(&["discrepancy", "--config", cfg]).status.code(), Some(2));
}

#[test]
fn calibration_matches_golden_file() {
    let out = stdout(&horolab(&["sieve-check", "--op", "calibration"]));
    let golden = include_str!("../golden/calibration.csv");
    let parse = |text: &str| -> Vec<horolab::commands::CalibrationRow> {
        csv::Reader::from_reader(text.as_bytes()).deserialize().map(Result::unwrap).collect()
    };
    let (got, want) = (parse(&out), parse(golden));
    assert_eq!(out.lines().next(), Some("op,R,k,lhs,rhs,residual"));
    assert_eq!(got.len(), want.len());
    for (g, w) in got.iter().zip(&want) {
        assert_eq!((&g.op, g.r, g.k), (&w.op, w.r, w.k));
        for (a, b) in [(g.lhs, w.lhs), (g.rhs, w.rhs), (g.residual, w.residual)] {
            assert!((a - b).abs() <= 1e-12 * (1.0 + b.abs()), "{}: {a} vs {b}", g.op);
        }
    }
}

#[test]
fn geometry_verbs_write_json() {
    let out = stdout(&horolab(&["fundamental-period", "--g", "1,0,0,1", "--T", "10"]));
    let v: serde_json::Value = serde_json::from_str(&out).unwrap();
    assert_eq!(v[0]["yT"], 1.0);
    assert_eq!((v[0]["m"].as_i64(), v[0]["n"].as_i64()), (Some(0), Some(1)));

    let out = stdout(&horolab(&["reduce", "--z", "0,0.5"]));
    let v: serde_json::Value = serde_json::from_str(&out).unwrap();
    assert!((v[0]["y"].as_f64().unwrap() - 2.0).abs() < 1e-15);

    let out = stdout(&horolab(&["approx", "--g", XI, "--T", "1e4", "--t0", "100", "--delta", "0.2"]));
    let v: serde_json::Value = serde_json::from_str(&out).unwrap();
    assert!(v["period"].as_f64().unwrap() > 0.0);
    assert!(v["measured_max_dist"].as_f64().unwrap() <= 2.0 * 0.2);
    assert_eq!(horolab(&["approx", "--g", XI, "--T", "1e4", "--out", "csv"]).status.code(), Some(2));
}

#[test]
fn seed_selects_the_start_point() {
    let run = |seed: &str| stdout(&horolab(&["r-param", "--seed", seed, "--T", "1e4", "--out", "csv"]));
    assert_eq!(run("3"), run("3"));
    assert_ne!(run("3"), run("4"));
}

#[test]
fn smallaps_rows() {
    let out = stdout(&horolab(&["smallaps", "--period", "1000", "--q", "6", "--s", "1,2,3", "--K", "1e4"]));
    let mut lines = out.lines();
    assert_eq!(
        lines.next(),
        Some("s,q,k,lhs,bound,sparse_bound,regime,rational_gap,rational_tolerance,in_range")
    );
    assert_eq!(lines.count(), 3);
    assert_eq!(horolab(&["smallaps", "--period", "1000", "--q", "6", "--s", "4"]).status.code(), Some(2));
}
