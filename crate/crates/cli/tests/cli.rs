use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

fn lbsim(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_lbsim"))
        .args(args)
        .output()
        .expect("spawn lbsim")
}

fn run_in(dir: &Path, args: &[&str]) -> Output {
    let mut all: Vec<&str> = args.to_vec();
    all.extend(["--out", dir.to_str().unwrap()]);
    lbsim(&all)
}

fn ok(out: &Output) -> String {
    assert_eq!(
        out.status.code(),
        Some(0),
        "stderr: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn json(path: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

fn csv_rows(path: &Path) -> Vec<Vec<String>> {
    fs::read_to_string(path)
        .unwrap()
        .lines()
        .map(|l| l.split(',').map(str::to_string).collect())
        .collect()
}

#[test]
fn simulate_menon_on_static_constant() {
    let dir = TempDir::new().unwrap();
    ok(&run_in(dir.path(), &["simulate", "--bench", "static-constant", "--criterion", "menon"]));
    let summary = json(&dir.path().join("summary.json"));
    let scenario: Vec<u64> = summary["scenario"]
        .as_array()
        .unwrap()
        .iter()
        .map(|v| v.as_u64().unwrap())
        .collect();
    assert_eq!(&scenario[..2], &[46, 92]);
    assert_eq!(summary["num_lb"], scenario.len());
    let rows = csv_rows(&dir.path().join("trace.csv"));
    assert_eq!(rows[0].join(","), "t,decision,mu,m,u,I,U_cum,T_acc");
    assert_eq!(rows.len(), 601);
    assert_eq!(rows[47][1], "lb");
}

#[test]
fn simulate_without_balancing() {
    let dir = TempDir::new().unwrap();
    ok(&run_in(dir.path(), &["simulate", "--bench", "static-constant", "--scenario", ""]));
    let summary = json(&dir.path().join("summary.json"));
    assert_eq!(summary["num_lb"], 0);
    // m(t) = 52 (1 + 0.1 t)
    let mut expected = 0.0;
    let mut imbalance = 0.0;
    for t in 0..600 {
        if t > 0 {
            imbalance += 0.1;
        }
        expected += 52.0 * (1.0 + imbalance);
    }
    let total = summary["total_time"].as_f64().unwrap();
    assert!((total - expected).abs() <= 1e-9 * expected, "{total} vs {expected}");
}

#[test]
fn procassini_trace_resets_cumulative_imbalance() {
    let dir = TempDir::new().unwrap();
    ok(&run_in(
        dir.path(),
        &["simulate", "--bench", "static-constant", "--criterion", "procassini:rho=19.43"],
    ));
    let rows = csv_rows(&dir.path().join("trace.csv"));
    let lbs: Vec<&Vec<String>> = rows[1..].iter().filter(|r| r[1] == "lb").collect();
    assert!(!lbs.is_empty());
    for r in lbs {
        assert_eq!(r[6].parse::<f64>().unwrap(), 0.0, "U_cum at t={}", r[0]);
    }
}

#[test]
fn simulate_rejects_mixed_inputs() {
    let out = lbsim(&["simulate", "--bench", "static-constant", "--criterion", "menon", "--scenario", "3"]);
    assert_eq!(out.status.code(), Some(2));
    let out = lbsim(&["simulate", "--bench", "static-constant"]);
    assert_eq!(out.status.code(), Some(2));
    let out = lbsim(&["simulate", "--bench", "static-constant", "--scenario", "700"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn optimal_respects_state_bound() {
    let dir = TempDir::new().unwrap();
    ok(&run_in(dir.path(), &["optimal", "--bench", "static-constant"]));
    let s = json(&dir.path().join("optimal.json"));
    let expanded = s["stats"]["nodes_expanded"].as_u64().unwrap();
    assert!(expanded <= 600 * 601 / 2 + 600, "{expanded}");
    assert_eq!(s["state_bound"], 180_900);
}

#[test]
fn optimal_nth_best_inline() {
    let dir = TempDir::new().unwrap();
    let model = r#"{"P":64,"gamma":600,"W0":640,"C":30,"omega":"0","iota":"0.05*t"}"#;
    ok(&run_in(dir.path(), &["optimal", "--gamma", "12", "--inline", model, "--nth", "4"]));
    let s = json(&dir.path().join("optimal.json"));
    let totals: Vec<f64> = s["ranked"]
        .as_array()
        .unwrap()
        .iter()
        .map(|r| r["total_time"].as_f64().unwrap())
        .collect();
    assert_eq!(totals.len(), 4);
    assert!(totals.windows(2).all(|w| w[0] <= w[1]), "{totals:?}");
    assert_eq!(csv_rows(&dir.path().join("ranked.csv")).len(), 5);
}

#[test]
fn optimal_verify_brute() {
    let dir = TempDir::new().unwrap();
    let stdout = ok(&run_in(
        dir.path(),
        &["optimal", "--bench", "static-constant", "--verify-brute", "--gamma-cap", "14"],
    ));
    assert!(stdout.lines().any(|l| l.starts_with("MATCH gamma=14")), "{stdout}");
}

#[test]
fn compare_all() {
    let dir = TempDir::new().unwrap();
    ok(&run_in(dir.path(), &["compare", "--bench", "all", "--criteria", "menon,proposed"]));
    let rows = csv_rows(&dir.path().join("report.csv"));
    assert_eq!(rows[0].join(","), "benchmark_id,criterion_id,params,total_time,relative,num_lb,scenario");
    let body = &rows[1..];
    assert_eq!(body.len(), 24);
    assert_eq!(body.iter().filter(|r| r[1] == "optimal").count(), 8);
    assert!(body.iter().all(|r| r[4].parse::<f64>().unwrap() >= 1.0));
    let rel = |b: &str, c: &str| -> f64 {
        body.iter().find(|r| r[0] == b && r[1] == c).unwrap()[4].parse().unwrap()
    };
    assert!(rel("static-autocorrect", "proposed") < rel("static-autocorrect", "menon"));
    assert!((rel("irregular-constant", "menon") - rel("irregular-constant", "proposed")).abs() <= 0.10);
    let report = json(&dir.path().join("report.json"));
    assert_eq!(report["rows"].as_array().unwrap().len(), 24);
    assert_eq!(report["supplementary"].as_array().unwrap().len(), 0);
}

#[test]
fn compare_marks_supplementary_rows() {
    let dir = TempDir::new().unwrap();
    ok(&run_in(dir.path(), &["compare", "--bench", "static-linear", "--gamma", "60", "--criteria", "zhai,menon"]));
    let report = json(&dir.path().join("report.json"));
    assert_eq!(report["supplementary"], serde_json::json!(["zhai:phase=3"]));
}

#[test]
fn compare_is_deterministic() {
    let a = TempDir::new().unwrap();
    let b = TempDir::new().unwrap();
    let args = ["compare", "--bench", "all", "--gamma", "120", "--criteria", "periodic:T=25,menon,zhai,proposed"];
    ok(&run_in(a.path(), &args));
    ok(&run_in(b.path(), &args));
    for f in ["report.csv", "report.json"] {
        assert_eq!(fs::read(a.path().join(f)).unwrap(), fs::read(b.path().join(f)).unwrap(), "{f}");
    }
}

#[test]
fn sweep_rho() {
    let dir = TempDir::new().unwrap();
    ok(&run_in(
        dir.path(),
        &[
            "sweep", "--bench", "static-constant", "--criterion", "procassini", "--param", "rho", "--from", "0.5",
            "--to", "50", "--steps", "5000",
        ],
    ));
    let s = json(&dir.path().join("sweep.json"));
    let best = s["best"]["value"].as_f64().unwrap();
    assert!((17.0..=21.0).contains(&best), "{best}");
    assert_eq!(csv_rows(&dir.path().join("sweep.csv")).len(), 5001);
}

#[test]
fn sweep_grid_validation() {
    let out = lbsim(&[
        "sweep", "--bench", "static-constant", "--criterion", "procassini", "--param", "rho", "--from", "0.5", "--to",
        "50", "--steps", "1",
    ]);
    assert_eq!(out.status.code(), Some(2));
    let out = lbsim(&[
        "sweep", "--bench", "static-constant", "--criterion", "procassini", "--param", "xi", "--from", "0.5", "--to",
        "50", "--steps", "4",
    ]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn sweep_marquez_shape() {
    let dir = TempDir::new().unwrap();
    ok(&run_in(
        dir.path(),
        &[
            "sweep", "--bench", "static-constant", "--criterion", "marquez", "--param", "xi", "--from", "0.5", "--to",
            "4", "--steps", "8",
        ],
    ));
    let rows = csv_rows(&dir.path().join("sweep.csv"));
    assert_eq!(rows[0], ["xi", "total_time", "num_lb"]);
    assert_eq!(rows.len(), 9);
}

#[test]
fn exit_codes() {
    let code = |args: &[&str]| lbsim(args).status.code();
    assert_eq!(code(&["compare", "--bench", "all", "--criteria", "menon", "--seed-free"]), Some(2));
    assert_eq!(code(&["compare", "--bench", "static-cubic", "--criteria", "menon"]), Some(2));
    assert_eq!(code(&["compare", "--bench", "all", "--criteria", "menon:rho=2"]), Some(2));
    assert_eq!(code(&["compare", "--bench", "all"]), Some(2));
    assert_eq!(code(&["optimal", "--inline", "{not json"]), Some(2));
    assert_eq!(code(&["optimal", "--inline", r#"{"P":4,"gamma":10,"W0":4,"C":1,"omega":"t +","iota":"0"}"#]), Some(2));
    assert_eq!(code(&["optimal", "--bench", "all"]), Some(2));
    assert_eq!(code(&["frobnicate"]), Some(2));
    // runtime failures
    let dir = TempDir::new().unwrap();
    let model = r#"{"P":4,"gamma":10,"W0":4,"C":1,"omega":"-2","iota":"0"}"#;
    assert_eq!(run_in(dir.path(), &["simulate", "--inline", model, "--scenario", ""]).status.code(), Some(1));
    let model = r#"{"P":4,"gamma":10,"W0":4,"C":1,"omega":"0","iota":"1/(t-3)"}"#;
    assert_eq!(run_in(dir.path(), &["optimal", "--inline", model]).status.code(), Some(1));
    let blocker = dir.path().join("file");
    fs::write(&blocker, "").unwrap();
    let out = lbsim(&[
        "simulate", "--bench", "static-constant", "--criterion", "menon", "--out", blocker.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn dump_config_round_trips() {
    let dir = TempDir::new().unwrap();
    let first = ok(&lbsim(&[
        "compare", "--bench", "static-linear", "--criteria", "Menon,PROCASSINI:RHO=19.43", "--gamma", "100",
        "--cost", "2600", "--dump-config",
    ]));
    let cfg: Value = serde_json::from_str(&first).unwrap();
    assert_eq!(cfg["criteria"], serde_json::json!(["menon", "procassini:rho=19.43"]));
    let path = dir.path().join("run.json");
    fs::write(&path, &first).unwrap();
    let second = ok(&lbsim(&["compare", "--config", path.to_str().unwrap(), "--dump-config"]));
    assert_eq!(first, second);

    // flags override the file
    let third = ok(&lbsim(&["compare", "--config", path.to_str().unwrap(), "--gamma", "50", "--dump-config"]));
    let cfg: Value = serde_json::from_str(&third).unwrap();
    assert_eq!(cfg["gamma"], 50);
    assert_eq!(cfg["cost"], 2600.0);
}

#[test]
fn config_file_drives_a_run() {
    let dir = TempDir::new().unwrap();
    let cfg = serde_json::json!({
        "model": {"P": 16, "gamma": 30, "W0": 160, "C": 20, "omega": "0", "iota": "0.1"},
        "criteria": ["menon", "proposed"],
        "out": dir.path(),
    });
    let path = dir.path().join("cfg.json");
    fs::write(&path, cfg.to_string()).unwrap();
    ok(&lbsim(&["compare", "--config", path.to_str().unwrap()]));
    let rows = csv_rows(&dir.path().join("report.csv"));
    assert_eq!(rows.len(), 4);
    assert_eq!(rows[1][0], "inline");
}
