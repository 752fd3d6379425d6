use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use tempfile::TempDir;

const NICHOLSON: &str = r#"
seed = 5

[domain]
n_modes = 8
n_grid = 16

[delay]
r = 1.0

[measure]
eta_ign = 0.2
ac_mass = 0.5
beta = 0.5
gamma0 = 0.2
gamma1 = 0.3

[birth]
preset = "nicholson"
p = 2.0

[kernel]
preset = "gaussian-bump"
amplitude = 1.0
width = 0.5

[solver]
dt = 0.05
t_end = 1.0
d = 0.1

[verify]
n_pairs = 50
"#;

fn write_config(dir: &TempDir, text: &str) -> PathBuf {
    let p = dir.path().join("config.toml");
    std::fs::write(&p, text).unwrap();
    p
}

fn sdd(args: &[&str], config: &Path, out: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_sdd"))
        .args(args)
        .arg("--config")
        .arg(config)
        .arg("--out")
        .arg(out)
        .output()
        .unwrap()
}

fn column(csv: &str, idx: usize) -> Vec<f64> {
    csv.lines()
        .skip(1)
        .map(|l| l.split(',').nth(idx).unwrap().parse().unwrap())
        .collect()
}

#[test]
fn zero_birth_decays_strictly() {
    let dir = TempDir::new().unwrap();
    let text = NICHOLSON
        .replace("preset = \"nicholson\"\np = 2.0", "preset = \"zero\"")
        .replace("t_end = 1.0", "t_end = 0.5");
    let cfg = write_config(&dir, &text);
    let out = dir.path().join("out");
    let o = sdd(&["run"], &cfg, &out);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let csv = std::fs::read_to_string(out.join("trajectory.csv")).unwrap();
    assert!(csv.starts_with("t,l2_norm,c_norm,cdelta_0.25,fp_iters\n"));
    let l2 = column(&csv, 1);
    assert_eq!(l2.len(), 11);
    assert!(l2.windows(2).all(|w| w[1] < w[0]));
    let summary: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out.join("summary.json")).unwrap()).unwrap();
    assert_eq!(summary["status"], "ok");
    assert!(summary["constants"]["L_Fc"].as_f64().unwrap() == 0.0);
}

#[test]
fn invalid_step_names_the_field() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(&dir, &NICHOLSON.replace("dt = 0.05", "dt = 0.3"));
    let o = sdd(&["run"], &cfg, &dir.path().join("out"));
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("solver.dt"));
    assert!(!dir.path().join("out").exists());
}

#[test]
fn nicholson_run_writes_outputs() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(&dir, NICHOLSON);
    let out = dir.path().join("out");
    let o = sdd(&["run"], &cfg, &out);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let csv = std::fs::read_to_string(out.join("trajectory.csv")).unwrap();
    assert_eq!(csv.lines().count(), 22);
    assert!(column(&csv, 2).iter().all(|c| c.is_finite() && *c > 0.0));
    let summary: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out.join("summary.json")).unwrap()).unwrap();
    assert!(summary["constants"]["absorbing_radius"].as_f64().unwrap() > 0.0);
    assert_eq!(summary["config"]["birth"]["preset"], "nicholson");
    let leftovers: Vec<_> = std::fs::read_dir(&out)
        .unwrap()
        .filter_map(|e| e.ok())
        .filter(|e| e.file_name().to_string_lossy().contains(".tmp"))
        .collect();
    assert!(leftovers.is_empty());
}

#[test]
fn remark1_demonstration_exits_zero() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(&dir, NICHOLSON);
    let out = dir.path().join("out");
    let o = sdd(&["verify", "--probes", "remark1"], &cfg, &out);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out.join("probe_remark1.json")).unwrap()).unwrap();
    assert_eq!(report["name"], "remark1");
    assert!(out.join("probe_remark1.csv").exists());
}

#[test]
fn unknown_probe_lists_valid_names() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(&dir, NICHOLSON);
    let o = sdd(&["verify", "--probes", "lipschitz,nope"], &cfg, &dir.path().join("out"));
    assert_eq!(o.status.code(), Some(2));
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("nope"));
    assert!(err.contains("fd-continuity") && err.contains("dissipativity"));
}

#[test]
fn verify_all_passes_and_summarises() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(&dir, NICHOLSON);
    let out = dir.path().join("out");
    let o = sdd(&["verify"], &cfg, &out);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stdout));
    let summary: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out.join("summary.json")).unwrap()).unwrap();
    assert_eq!(summary["all_passed"], true);
    assert_eq!(summary["probes"].as_object().unwrap().len(), 8);
}

#[test]
fn converge_writes_order_table() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(&dir, NICHOLSON);
    let out = dir.path().join("out");
    let o = sdd(&["converge"], &cfg, &out);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let table = std::fs::read_to_string(out.join("order_table.csv")).unwrap();
    let lines: Vec<_> = table.lines().collect();
    assert_eq!(lines[0], "dt,final_l2,diff_to_next,order");
    assert_eq!(lines.len(), 4);
    let order: f64 = lines[2].split(',').nth(3).unwrap().parse().unwrap();
    assert!((0.9..=1.5).contains(&order), "order {order}");
}

#[test]
fn bad_convergence_list_fails() {
    let dir = TempDir::new().unwrap();
    let text = format!("{NICHOLSON}\n[converge]\ndt_list = [0.01, 0.02]\n");
    let cfg = write_config(&dir, &text);
    let o = sdd(&["converge"], &cfg, &dir.path().join("out"));
    assert_ne!(o.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&o.stderr).contains("converge.dt_list"));
}

#[test]
fn seed_override_changes_random_initial_data() {
    let dir = TempDir::new().unwrap();
    let text = format!("{NICHOLSON}\n[initial]\npreset = \"random\"\namplitude = 1.0\n");
    let cfg = write_config(&dir, &text);
    let run = |seed: &str, name: &str| {
        let out = dir.path().join(name);
        let o = Command::new(env!("CARGO_BIN_EXE_sdd"))
            .args(["run", "--seed", seed, "--config"])
            .arg(&cfg)
            .arg("--out")
            .arg(&out)
            .output()
            .unwrap();
        assert!(o.status.success());
        std::fs::read_to_string(out.join("trajectory.csv")).unwrap()
    };
    assert_eq!(run("1", "a"), run("1", "b"));
    assert_ne!(run("1", "a"), run("2", "c"));
}
