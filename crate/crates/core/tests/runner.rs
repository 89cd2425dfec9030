use std::fs;
use std::path::Path;
use std::process::Command;

use kirchhoff_nehari::runner::{parse_config, parse_config_with, run};
use kirchhoff_nehari::Error;
use serde_json::Value;

const BASE: &str = "p = 2\nq = 1.5\nr = 5\ns = 0.4\n";

fn config(dir: &Path, extra: &str) -> kirchhoff_nehari::runner::ExperimentConfig {
    let text = format!("{BASE}{extra}");
    parse_config_with(&text, &[("output.dir", dir.display().to_string())]).unwrap()
}

fn manifest(dir: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(dir.join("manifest.json")).unwrap()).unwrap()
}

fn csv_rows(path: &Path) -> Vec<csv::StringRecord> {
    csv::Reader::from_path(path).unwrap().records().map(|r| r.unwrap()).collect()
}

fn num(rec: &csv::StringRecord, i: usize) -> f64 {
    rec[i].parse().unwrap()
}

#[test]
fn thresholds_mode_writes_a_consistent_table() {
    let tmp = tempfile::tempdir().unwrap();
    let out = run(&config(tmp.path(), "mode = thresholds\ngrid.n_nodes = 15\n")).unwrap();
    assert_eq!(out.manifest.status, "ok");
    let rows = csv_rows(&tmp.path().join("thresholds.csv"));
    let get = |name: &str| num(rows.iter().find(|r| &r[0] == name).unwrap(), 1);
    assert_eq!(get("lambda0"), get("lambda1").min(get("lambda2")));
    assert_eq!(manifest(tmp.path())["status"], "ok");
}

#[test]
fn sweep_rows_follow_lambda() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = config(
        tmp.path(),
        "grid.n_nodes = 15\nmode = sweep\nsweep.lambda_min = 0.1*lambda0\nsweep.lambda_max = 0.9*lambda0\nsweep.count = 5\n",
    );
    run(&cfg).unwrap();
    let rows = csv_rows(&tmp.path().join("sweep.csv"));
    assert_eq!(rows.len(), 5);
    let lambdas: Vec<f64> = rows.iter().map(|r| num(r, 0)).collect();
    let plus: Vec<f64> = rows.iter().map(|r| num(r, 1)).collect();
    assert!(lambdas.windows(2).all(|w| w[0] < w[1]));
    assert!(plus.iter().all(|&t| t < 0.0), "{plus:?}");
    // the energy only drops as lambda grows on positive directions
    assert!(plus.windows(2).all(|w| w[1] <= w[0] * (1.0 - 1e-9)), "{plus:?}");
    let m = manifest(tmp.path());
    let l0 = m["thresholds"]["lambda0"].as_f64().unwrap();
    assert!((lambdas[0] - 0.1 * l0).abs() <= 1e-12 * l0);
    assert!((lambdas[4] - 0.9 * l0).abs() <= 1e-12 * l0);
}

#[test]
fn oracle_mode_agrees_with_the_solver() {
    let tmp = tempfile::tempdir().unwrap();
    run(&config(tmp.path(), "grid.n_nodes = 4\nmode = oracle\n")).unwrap();
    let rows = csv_rows(&tmp.path().join("oracle.csv"));
    assert_eq!(rows.len(), 1);
    let headers = csv::Reader::from_path(tmp.path().join("oracle.csv")).unwrap().headers().unwrap().clone();
    let col = |name: &str| headers.iter().position(|h| h == name).unwrap();
    let delta = num(&rows[0], col("delta_plus"));
    assert!(delta.abs() < 1e-6, "{delta}");
}

#[test]
fn json_output_replaces_csv() {
    let tmp = tempfile::tempdir().unwrap();
    let out = run(&config(tmp.path(), "mode = thresholds\ngrid.n_nodes = 7\noutput.format = json\n")).unwrap();
    assert_eq!(out.manifest.files, ["thresholds.json", "manifest.json"]);
    let table: Value = serde_json::from_str(&fs::read_to_string(tmp.path().join("thresholds.json")).unwrap()).unwrap();
    assert!(table["lambda0"].as_f64().unwrap() > 0.0);
}

#[test]
fn lambda_above_threshold_is_flagged_not_refused() {
    let tmp = tempfile::tempdir().unwrap();
    let out = run(&config(tmp.path(), "grid.n_nodes = 7\nlambda = 2*lambda0\n")).unwrap();
    assert!(out.manifest.flags.iter().any(|f| f == "THRESHOLD_EXCEEDED:lambda0"));
    assert_eq!(manifest(tmp.path())["flags"][0], "THRESHOLD_EXCEEDED:lambda0");
}

#[test]
fn failed_run_still_writes_a_manifest() {
    let tmp = tempfile::tempdir().unwrap();
    let err = run(&config(tmp.path(), "grid.n_nodes = 7\nf = 1/x\n")).unwrap_err();
    assert_eq!(err.class(), "EVAL_ERROR");
    let m = manifest(tmp.path());
    assert_eq!(m["status"], "failed");
    assert_eq!(m["error"]["class"], "EVAL_ERROR");
}

#[test]
fn validation_lists_every_problem() {
    let err = parse_config("q = 3\ngrid.n_nodes = 0\nrestarts = 0\nbogus = 1\n").unwrap_err();
    let Error::Validation(msgs) = &err else {
        panic!("expected a validation error, got {err:?}");
    };
    assert!(msgs.len() >= 4, "{msgs:?}");
    assert!(msgs.iter().any(|m| m.contains("bogus")));
    assert_eq!(err.exit_code(), 3);
}

fn solve_cli(args: &[&str]) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_solve")).args(args).output().unwrap()
}

#[test]
fn cli_exit_codes() {
    let tmp = tempfile::tempdir().unwrap();
    let missing = tmp.path().join("nope.conf");
    assert_eq!(solve_cli(&[missing.to_str().unwrap()]).status.code(), Some(2));

    let bad = tmp.path().join("bad.conf");
    fs::write(&bad, "q = 3\n").unwrap();
    let out = solve_cli(&[bad.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stderr).contains("VALIDATION_ERROR"));

    let pole = tmp.path().join("pole.conf");
    fs::write(&pole, format!("{BASE}grid.n_nodes = 7\ng = 1/x\n")).unwrap();
    let dir = tmp.path().join("pole");
    let out = solve_cli(&[pole.to_str().unwrap(), "--out", dir.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(3));
    assert!(dir.join("manifest.json").exists());
}

#[test]
fn cli_solve_is_reproducible() {
    let tmp = tempfile::tempdir().unwrap();
    let conf = tmp.path().join("solve.conf");
    fs::write(&conf, format!("{BASE}grid.n_nodes = 15\n")).unwrap();
    let mut outputs = Vec::new();
    for name in ["one", "two"] {
        let dir = tmp.path().join(name);
        let out = solve_cli(&[conf.to_str().unwrap(), "--out", dir.to_str().unwrap(), "--seed", "9", "--restarts", "4"]);
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
        let files: Vec<Vec<u8>> = ["solutions.csv", "profile_plus.csv", "profile_minus.csv"]
            .iter()
            .map(|f| fs::read(dir.join(f)).unwrap())
            .collect();
        outputs.push(files);
    }
    assert_eq!(outputs[0], outputs[1]);
    let m = manifest(&tmp.path().join("one"));
    assert_eq!(m["config"]["seed"], 9);
    assert_eq!(m["config"]["restarts"], 4);
}
