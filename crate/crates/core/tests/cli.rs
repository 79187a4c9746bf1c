use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_geophase"))
}

fn configs() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("configs")
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn write(dir: &Path, name: &str, text: &str) -> PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p
}

fn stderr_json(out: &Output) -> serde_json::Value {
    serde_json::from_slice(&out.stderr).expect("stderr is a JSON error")
}

const SMALL: &str = r#"
units = "dimensionless"
[physical]
g = 1.0
delta = 20.0
omega = 1.0
kappa = 1.0
[schedule]
theta_over_pi = 0.25
phi_dot_over_gamma = 0.1
[sweep]
parameter = "theta_over_pi"
start = 0.25
stop = 0.5
count = 3
"#;

#[test]
fn empty_config_is_a_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "empty.toml", "");
    let out = run(&["derive", "--config", cfg.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    let err = stderr_json(&out);
    assert_eq!(err["exit_code"], 2);
    assert!(err["message"].as_str().unwrap().contains("physical.g"));
}

#[test]
fn misspelled_key_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let text = SMALL.replace("phi_dot_over_gamma", "phi_dott");
    let cfg = write(dir.path(), "typo.toml", &text);
    let out = run(&["cycle", "--config", cfg.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr_json(&out)["message"].as_str().unwrap().contains("phi_dott"));
}

#[test]
fn fast_steering_is_out_of_regime() {
    let dir = tempfile::tempdir().unwrap();
    let text = SMALL.replace("phi_dot_over_gamma = 0.1", "phi_dot_over_gamma = 5.0");
    let cfg = write(dir.path(), "fast.toml", &text);
    let out = run(&["analytic", "--config", cfg.to_str().unwrap(), "--out", dir.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(4), "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn cs_cycle_report() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&["cycle", "--config", "cs_defaults", "--out", dir.path().to_str().unwrap()]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let v: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("cycle.json")).unwrap()).unwrap();
    let beta = v["beta_numeric"].as_f64().unwrap();
    let damping = v["damping_numeric"].as_f64().unwrap();
    assert!((beta + 0.912399).abs() < 1e-5, "{beta}");
    assert!((damping - 0.911736).abs() < 1e-5, "{damping}");
    assert!((v["beta_analytic"].as_f64().unwrap() + 0.920151).abs() < 1e-6);
}

#[test]
fn frozen_sweep_has_no_phase() {
    let dir = tempfile::tempdir().unwrap();
    let text = SMALL.replace("phi_dot_over_gamma = 0.1", "phi_dot_over_gamma = 0.0");
    let cfg = write(dir.path(), "frozen.toml", &text);
    let out = run(&["sweep", "--config", cfg.to_str().unwrap(), "--out", dir.path().to_str().unwrap()]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = std::fs::read_to_string(dir.path().join("sweep_cycle.csv")).unwrap();
    let mut rows = csv.lines().filter(|l| !l.starts_with('#'));
    assert_eq!(
        rows.next().unwrap(),
        "grid_index,theta,phi_dot_over_Gamma,beta_analytic,beta_numeric,damping_analytic,damping_numeric,abs_err_beta,leak_to_g"
    );
    let data: Vec<Vec<f64>> = rows
        .map(|l| l.split(',').map(|x| x.parse().unwrap()).collect())
        .collect();
    assert_eq!(data.len(), 3);
    for r in data {
        assert_eq!(r[3], 0.0);
        assert!(r[4].abs() < 1e-12 && (r[6] - 1.0).abs() < 1e-9 && r[8].abs() < 1e-12, "{r:?}");
    }
}

#[test]
fn sweep_is_deterministic_across_job_counts() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "small.toml", SMALL);
    let mut outputs = Vec::new();
    for (k, jobs) in ["1", "3", "3"].iter().enumerate() {
        let out_dir = dir.path().join(format!("run{k}"));
        let out = run(&[
            "sweep",
            "--config",
            cfg.to_str().unwrap(),
            "--out",
            out_dir.to_str().unwrap(),
            "--jobs",
            jobs,
            "--seedless-deterministic",
        ]);
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
        outputs.push(std::fs::read(out_dir.join("sweep_cycle.csv")).unwrap());
    }
    assert_eq!(outputs[0], outputs[1]);
    assert_eq!(outputs[1], outputs[2]);
    let text = String::from_utf8(outputs.remove(0)).unwrap();
    assert!(text.starts_with("# "));
}

#[test]
fn shipped_configs_parse() {
    for entry in std::fs::read_dir(configs()).unwrap() {
        let path = entry.unwrap().path();
        geophase::config::load_config(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
    }
}

#[test]
fn bad_subcommand_exits_two() {
    let out = run(&["bogus", "--config", "cs_defaults"]);
    assert_eq!(out.status.code(), Some(2));
}
