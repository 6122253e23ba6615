use std::path::Path;
use std::process::{Command, Output};

fn abcd(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_abcd"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn write_config(dir: &Path, json: &str) -> String {
    let path = dir.join("config.json");
    std::fs::write(&path, json).unwrap();
    path.to_str().unwrap().to_string()
}

const SMALL_RUN: &str = r#"{
  "params": "bbm-bbm", "epsilon": 0.1, "t_end": 2.0, "dt": 0.05,
  "grid": {"dim": 1, "length": 100.53096491487338, "points": 128},
  "initial": {"eta": {"kind": "gaussian", "amplitude": 1.0, "width": 2.0}},
  "output_every": 4, "snapshot_every": 20
}"#;

#[test]
fn verify_partition_passes_and_writes_json() {
    let dir = tempfile::tempdir().unwrap();
    let out = abcd(&["verify", "partition", "--out", dir.path().to_str().unwrap()]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = std::fs::read_to_string(dir.path().join("verify_partition.json")).unwrap();
    let v: serde_json::Value = serde_json::from_str(&text).unwrap();
    assert_eq!(v["passed"], true);
    assert!(v["checks"]
        .as_array()
        .unwrap()
        .iter()
        .all(|c| c["measured"].as_f64().unwrap() <= 1e-12));
}

#[test]
fn unknown_suite_fails() {
    let dir = tempfile::tempdir().unwrap();
    let out = abcd(&["verify", "bogus", "--out", dir.path().to_str().unwrap()]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("unknown verification suite 'bogus'"));
}

#[test]
fn run_is_deterministic_and_writes_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), SMALL_RUN);
    let a = dir.path().join("a");
    let b = dir.path().join("b");
    for d in [&a, &b] {
        let out = abcd(&["run", "--config", &cfg, "--out", d.to_str().unwrap(), "--quiet"]);
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    }
    let ea = std::fs::read(a.join("energy.csv")).unwrap();
    assert_eq!(ea, std::fs::read(b.join("energy.csv")).unwrap());
    assert!(String::from_utf8_lossy(&ea).starts_with("t,Us,Ns,H,hamiltonian,curl_res,max_eta,blow_up\n"));
    let events = std::fs::read_to_string(a.join("events.jsonl")).unwrap();
    assert!(events.lines().next().unwrap().contains("\"event\":\"start\""));
    assert!(events.lines().last().unwrap().contains("\"status\":\"completed\""));
    let snaps: Vec<_> = std::fs::read_dir(&a)
        .unwrap()
        .map(|e| e.unwrap().file_name().to_string_lossy().into_owned())
        .filter(|n| n.starts_with("snapshot_t") && n.ends_with(".bin"))
        .collect();
    assert_eq!(snaps.len(), 3);

    let report = abcd(&["report", dir.path().to_str().unwrap()]);
    assert!(report.status.success());
    let summary = std::fs::read_to_string(dir.path().join("summary.csv")).unwrap();
    assert_eq!(summary.lines().count(), 3);
}

#[test]
fn besov_of_zero_snapshot_is_zero() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        r#"{"t_end": 0.5, "dt": 0.1, "snapshot_every": 5,
            "grid": {"dim": 1, "length": 100.53096491487338, "points": 64},
            "initial": {"eta": {"kind": "zero"}}}"#,
    );
    let run_dir = dir.path().join("run");
    assert!(abcd(&["run", "--config", &cfg, "--out", run_dir.to_str().unwrap()])
        .status
        .success());
    let snap = std::fs::read_dir(&run_dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .find(|p| p.extension().is_some_and(|e| e == "bin"))
        .unwrap();
    let out = abcd(&["besov", snap.to_str().unwrap(), "-s", "1.5", "-r", "inf", "--json"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    let norms = v.as_array().unwrap();
    assert_eq!(norms.len(), 3);
    assert!(norms.iter().all(|n| n["norm"] == 0.0));
}

#[test]
fn besov_rejects_unreadable_file() {
    let out = abcd(&["besov", "/nonexistent/snapshot.bin"]);
    assert!(!out.status.success());
}

#[test]
fn report_on_empty_directory_fails() {
    let dir = tempfile::tempdir().unwrap();
    let out = abcd(&["report", dir.path().to_str().unwrap()]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("no runs found"));
}

#[test]
fn sweep_refuses_excluded_parameters() {
    let dir = tempfile::tempdir().unwrap();
    let out = abcd(&["sweep", "--preset", "excluded-2", "--out", dir.path().to_str().unwrap()]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("excluded case a=b=0, c<0, d>0"));
}

#[test]
fn small_sweep_writes_scaling_table() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        r#"{"epsilon_ladder": [0.2, 0.1], "horizon": {"kind": "fixed", "k": 0.5}, "output_every": 10,
            "grid": {"dim": 1, "length": 100.53096491487338, "points": 64}, "seeds": [1, 2]}"#,
    );
    let out_dir = dir.path().join("sweep");
    let out = abcd(&[
        "--jobs",
        "2",
        "sweep",
        "--config",
        &cfg,
        "--out",
        out_dir.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let table = std::fs::read_to_string(out_dir.join("scaling.csv")).unwrap();
    assert_eq!(table.lines().count(), 5);
    assert!(table.starts_with("epsilon,seed,t_end,us0,t_exist,eps_t_exist,censored,exit\n"));
    assert!(out_dir.join("eps_0.1_seed_2").join("energy.csv").is_file());
}
