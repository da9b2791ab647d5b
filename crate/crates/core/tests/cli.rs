use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn hresum(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_hresum"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn read(dir: &Path, name: &str) -> String {
    fs::read_to_string(dir.join(name)).unwrap()
}

#[test]
fn moments_to_stdout() {
    let out = hresum(&["moments", "--ell", "1", "--k0", "3"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "k,mu");
    assert_eq!(lines.len(), 5);
    assert!(lines[2].starts_with("1,5e-1"));
}

#[test]
fn pipeline_through_files() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path().to_str().unwrap();
    assert!(
        hresum(&["moments", "--k0", "20", "--eta", "1e-6", "--seed", "3", "--out", d])
            .status
            .success()
    );
    let sidecar: serde_json::Value = serde_json::from_str(&read(dir.path(), "moments.json")).unwrap();
    assert_eq!(sidecar["seed"], 3);

    let moments = dir.path().join("moments.csv");
    let m = moments.to_str().unwrap();
    for sub in ["coeffs", "msum", "truncate", "invert"] {
        let out = hresum(&[sub, "--moments", m, "--eta", "1e-6", "--out", d]);
        assert!(out.status.success(), "{sub}: {}", String::from_utf8_lossy(&out.stderr));
    }
    assert!(read(dir.path(), "coeffs.csv").starts_with("n,u_hat\n"));
    assert!(read(dir.path(), "msum.csv").starts_with("m,M\n"));
    assert!(read(dir.path(), "reconstruction.csv").starts_with("t,u\n"));
    let report: serde_json::Value = serde_json::from_str(&read(dir.path(), "truncation.json")).unwrap();
    assert!(report["m0"].as_u64().unwrap() > 10);
}

#[test]
fn eval_with_fixed_m0() {
    let out = hresum(&["eval", "--m0", "30", "--x-lo", "1", "--x-hi", "100", "--x-count", "5"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next().unwrap(), "x,standard,resummed,true");
    let last: Vec<f64> = lines.last().unwrap().split(',').map(|v| v.parse().unwrap()).collect();
    assert_eq!(last[0], 100.0);
    assert!(((last[2] - last[3]) / last[3]).abs() < 0.1);
}

#[test]
fn scaled_eval_below_one() {
    let out = hresum(&[
        "eval",
        "--m0",
        "20",
        "--c",
        "4",
        "--x-lo",
        "0.1",
        "--x-hi",
        "1",
        "--x-count",
        "4",
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = String::from_utf8(out.stdout).unwrap();
    for line in text.lines().skip(1) {
        let v: Vec<f64> = line.split(',').map(|v| v.parse().unwrap()).collect();
        assert!((v[2] - v[3]).abs() < 1e-6, "{line}");
    }
}

#[test]
fn errors_are_json_on_stderr() {
    let out = hresum(&["eval", "--x-lo", "0", "--x-hi", "1"]);
    assert!(!out.status.success());
    let err: serde_json::Value = serde_json::from_slice(&out.stderr).unwrap();
    assert_eq!(err["error"], "invalid_argument");

    let out = hresum(&["truncate", "--k0", "20", "--eta", "0.5", "--seed", "1"]);
    assert!(!out.status.success());
    let err: serde_json::Value = serde_json::from_slice(&out.stderr).unwrap();
    assert_eq!(err["error"], "no_plateau");
}

#[test]
fn experiment_from_config_file() {
    let dir = tempfile::tempdir().unwrap();
    let out_dir = dir.path().join("run");
    let config = serde_json::json!({
        "scenario": "custom",
        "ell": 1.0,
        "k0": 12,
        "eta": [0.0, 1e-3],
        "seeds": [7],
        "x_range": {"lo": 1.0, "hi": 20.0, "count": 8},
        "truncation": {"m_max": 60, "deriv_tol": 0.01, "min_plateau_len": 3, "asympt_factor": 0.1},
        "output_dir": out_dir,
    });
    let path = dir.path().join("cfg.json");
    fs::write(&path, config.to_string()).unwrap();
    let out = hresum(&["experiment", "--config", path.to_str().unwrap()]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(out_dir.join("manifest.json").exists());
    assert!(out_dir.join("summary.csv").exists());
}
