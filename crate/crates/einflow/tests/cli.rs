//! End-to-end checks of the command-line front end: subcommands, file
//! outputs, exit codes, config precedence and manifest-based reruns.

use std::fs;
use std::path::PathBuf;
use std::process::Command;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_einflow"))
}

fn scratch(tag: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("einflow-cli-{tag}-{}", std::process::id()));
    let _ = fs::remove_dir_all(&dir);
    fs::create_dir_all(&dir).unwrap();
    dir
}

#[test]
fn catalog_table_and_json() {
    let out = bin().args(["catalog", "--m", "1"]).output().unwrap();
    assert!(out.status.success());
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(text.contains("P0") && text.contains("PAC2") && text.contains("PALC2"));

    let out = bin().args(["catalog", "--m", "2", "--mode", "negative", "--format", "json"]).output().unwrap();
    assert!(out.status.success());
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert!(v.as_array().unwrap().iter().any(|p| p["name"] == "PQK"));
    // P5 exists only for m <= 2
    let out = bin().args(["catalog", "--m", "3", "--format", "json"]).output().unwrap();
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert!(!v.as_array().unwrap().iter().any(|p| p["name"] == "P5"));
}

#[test]
fn eigen_prints_closed_form_deltas() {
    let out = bin().args(["eigen", "--point", "P0", "--m", "3"]).output().unwrap();
    assert!(out.status.success());
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(text.contains("0.6666666667"), "{text}");
    assert!(text.contains("saddle type on E: (3, 2)"), "{text}");
}

#[test]
fn shoot_writes_all_artifacts_and_reruns_bit_identically() {
    let dir = scratch("shoot");
    let run = || {
        bin()
            .args([
                "--out-dir",
                dir.to_str().unwrap(),
                "shoot",
                "--family",
                "zeta",
                "--s",
                "1,0,0",
                "--m",
                "1",
                "--mode",
                "ricci-flat",
                "--eta-budget",
                "120",
                "--out",
                "run1",
            ])
            .output()
            .unwrap()
    };
    let out = run();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(text.contains("converged(PAC2)"), "{text}");

    for name in ["run1.trajectory.csv", "run1.termination.json", "run1.profile.csv", "run1.summary.json", "run1.manifest.json"] {
        assert!(dir.join(name).exists(), "{name} missing");
    }
    let term: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.join("run1.termination.json")).unwrap()).unwrap();
    assert_eq!(term["kind"], "converged");
    assert_eq!(term["point"], "PAC2");
    let summary: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.join("run1.summary.json")).unwrap()).unwrap();
    assert_eq!(summary["kind"], "AC");

    let manifest: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.join("run1.manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["options"]["m"], "1");

    // rerun reproduces the trajectory byte-for-byte
    let first = fs::read(dir.join("run1.trajectory.csv")).unwrap();
    let out = run();
    assert!(out.status.success());
    let second = fs::read(dir.join("run1.trajectory.csv")).unwrap();
    assert_eq!(first, second);

    // a manifest can drive the rerun directly
    let out = bin()
        .args([
            "--config",
            dir.join("run1.manifest.json").to_str().unwrap(),
            "--out-dir",
            dir.to_str().unwrap(),
            "shoot",
            "--out",
            "run1b",
        ])
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let third = fs::read(dir.join("run1b.trajectory.csv")).unwrap();
    assert_eq!(first, third);

    // reconstruct from the stored trajectory
    let out = bin()
        .args([
            "reconstruct",
            "--traj",
            dir.join("run1.trajectory.csv").to_str().unwrap(),
            "--m",
            "1",
            "--mode",
            "ricci-flat",
        ])
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(text.contains("kind: Ac"), "{text}");
    let _ = fs::remove_dir_all(&dir);
}

#[test]
fn audit_json_and_mode_restriction_exit_code() {
    // no --mode given: the chirality set picks its required mode itself
    let out = bin()
        .args(["audit", "--set", "BSpin7minus", "--samples", "400", "--seed", "3", "--m", "1"])
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["verdict"], "pass");

    // infeasible spec: Spin(7) audit away from fiber dimension 1
    let out = bin()
        .args(["audit", "--set", "BSpin7minus", "--samples", "10", "--m", "2", "--mode", "ricci-flat"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn validation_and_numerical_exit_codes() {
    // unknown flag value
    let out = bin().args(["shoot", "--family", "nope", "--s", "1,0,0"]).output().unwrap();
    assert_eq!(out.status.code(), Some(1));
    // zeta needs s1 > 0
    let out = bin().args(["shoot", "--family", "zeta", "--s", "0,1,0", "--m", "1"]).output().unwrap();
    assert_eq!(out.status.code(), Some(1));
    // missing trajectory file
    let out = bin().args(["reconstruct", "--traj", "/nonexistent.csv", "--m", "1"]).output().unwrap();
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn config_file_feeds_defaults_and_flags_win() {
    let dir = scratch("config");
    let cfg = dir.join("run.conf");
    fs::write(&cfg, "m = 2\nmode = negative\nfamily = zeta\ns = 0.8,0,0.6\neta-budget = 40\n").unwrap();
    let out = bin()
        .args(["--config", cfg.to_str().unwrap(), "shoot", "--family", "zeta", "--s", "0.8,0,0.6"])
        .output()
        .unwrap();
    // config supplies m = 2 and negative mode; budget 40 is too short to
    // converge, so the run reports the unresolved exit code
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(text.contains("eta_budget_exhausted") || text.contains("converged"), "{text}");

    // a flag overrides the config value
    let out = bin()
        .args([
            "--config",
            cfg.to_str().unwrap(),
            "shoot",
            "--family",
            "zeta",
            "--s",
            "0.8,0,0.6",
            "--eta-budget",
            "260",
        ])
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(text.contains("converged(PAH)"), "{text}");
    assert!(text.contains("y1 = 1.41421356"), "{text}");
    let _ = fs::remove_dir_all(&dir);
}

#[test]
fn sweep_csv_shape_and_determinism() {
    let dir = scratch("sweep");
    let mut cmd = bin();
    cmd.env("EINSTEINFLOW_THREADS", "2");
    let out = cmd
        .args(["--out-dir", dir.to_str().unwrap(), "sweep", "--family", "gamma", "--grid", "3", "--m", "1", "--mode", "ricci-flat", "--eta-budget", "200", "--out", "sw"])
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = fs::read_to_string(dir.join("sw.sweep.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next().unwrap(), "s1,s2,s3,kind,y1,beta,bdot_inf,cdot_inf,a_inf,t_final");
    assert_eq!(lines.count(), 3);

    // different worker count, identical bytes
    let mut cmd = bin();
    cmd.env("EINSTEINFLOW_THREADS", "1");
    let out = cmd
        .args(["--out-dir", dir.to_str().unwrap(), "sweep", "--family", "gamma", "--grid", "3", "--m", "1", "--mode", "ricci-flat", "--eta-budget", "200", "--out", "sw2"])
        .output()
        .unwrap();
    assert!(out.status.success());
    let a = fs::read(dir.join("sw.sweep.csv")).unwrap();
    let b = fs::read(dir.join("sw2.sweep.csv")).unwrap();
    assert_eq!(a, b);
    let _ = fs::remove_dir_all(&dir);
}
