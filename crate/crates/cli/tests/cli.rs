use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn wgheat(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_wgheat"))
        .current_dir(dir)
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn write_config(dir: &Path) -> String {
    let o = wgheat(dir, &["steady", "--preset", "fig3", "--dump-config"]);
    assert_eq!(o.status.code(), Some(0));
    let path = dir.join("cfg.json");
    fs::write(&path, &o.stdout).unwrap();
    path.to_str().unwrap().to_string()
}

#[test]
fn figure_writes_default_csv() {
    let dir = tempfile::tempdir().unwrap();
    let o = wgheat(dir.path(), &["figure", "fig2", "--out", "fig2.csv"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let text = fs::read_to_string(dir.path().join("fig2.csv")).unwrap();
    assert!(!text.contains('\r'));
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "T1,J_W1,J_W2,J_L,residual");
    assert_eq!(lines.len(), 102);
    for l in &lines[1..] {
        assert_eq!(l.split(',').count(), 5);
        for field in l.split(',') {
            field.parse::<f64>().unwrap();
        }
    }
}

#[test]
fn figure_without_out_uses_preset_name() {
    let dir = tempfile::tempdir().unwrap();
    let o = wgheat(dir.path(), &["figure", "fig5", "--points", "5", "--workers", "2"]);
    assert_eq!(o.status.code(), Some(0));
    let text = fs::read_to_string(dir.path().join("fig5.csv")).unwrap();
    assert_eq!(text.lines().count(), 6);
    assert!(text.starts_with("T1,J_W1,J_W2,J_L,P,eta,carnot,residual\n"));
}

#[test]
fn figure_json_embeds_spec() {
    let dir = tempfile::tempdir().unwrap();
    let o = wgheat(dir.path(), &["figure", "fig4", "--points", "3", "--format", "json", "--out", "f.json"]);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_str(&fs::read_to_string(dir.path().join("f.json")).unwrap()).unwrap();
    assert_eq!(v["spec"]["name"], "fig4");
    assert_eq!(v["rows"].as_array().unwrap().len(), 3);
}

#[test]
fn unknown_preset_is_a_validation_failure() {
    let dir = tempfile::tempdir().unwrap();
    let o = wgheat(dir.path(), &["figure", "fig7", "--format", "json"]);
    assert_eq!(o.status.code(), Some(1));
    let err: serde_json::Value = serde_json::from_slice(&o.stderr).unwrap();
    assert_eq!(err["error"]["kind"], "unknown_preset");
}

#[test]
fn dumped_config_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path());
    let again = wgheat(dir.path(), &["steady", "--config", &cfg, "--dump-config"]);
    assert_eq!(fs::read(&cfg).unwrap(), again.stdout);
    let v: serde_json::Value = serde_json::from_slice(&again.stdout).unwrap();
    // resonant laser frequencies are filled in and echoed
    assert_eq!(v["laser42"], 20.0);
    assert_eq!(v["laser43"], 20.0);
}

#[test]
fn overrides_apply_before_validation() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path());
    let o = wgheat(dir.path(), &["steady", "--config", &cfg, "--set", "temp1=10", "--dump-config"]);
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["temp1"], 10.0);
    let o = wgheat(dir.path(), &["steady", "--config", &cfg, "--set", "gamma21=-1"]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn steady_reports_everything() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path());
    let o = wgheat(dir.path(), &["steady", "--config", &cfg, "--format", "json"]);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["steady_state"]["method"], "linear");
    assert!(v["currents"]["j_w"].is_array());
    assert!(v["engine"]["carnot"].is_number());
    assert!(v["t_eff"].is_object());
    let o = wgheat(dir.path(), &["steady", "--config", &cfg, "--format", "csv"]);
    let text = stdout(&o);
    assert!(text.starts_with("quantity,value\n"));
    assert!(text.contains("\nJ_W1,"));
}

#[test]
fn strict_schema_rejects_unknown_keys() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path());
    let mut v: serde_json::Value = serde_json::from_str(&fs::read_to_string(&cfg).unwrap()).unwrap();
    v["tmep1"] = 3.0.into();
    fs::write(&cfg, v.to_string()).unwrap();
    let o = wgheat(dir.path(), &["steady", "--config", &cfg, "--format", "json"]);
    assert_eq!(o.status.code(), Some(1));
    let err: serde_json::Value = serde_json::from_slice(&o.stderr).unwrap();
    assert_eq!(err["error"]["kind"], "parse");
}

#[test]
fn solver_failure_exits_two() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path());
    // level 4 disconnected: no unique steady state
    let o = wgheat(
        dir.path(),
        &[
            "steady", "--config", &cfg, "--format", "json", "--set", "gamma42=0", "--set", "gamma43=0",
            "--set", "rabi42=0", "--set", "rabi43=0",
        ],
    );
    assert_eq!(o.status.code(), Some(2));
    let err: serde_json::Value = serde_json::from_slice(&o.stderr).unwrap();
    assert_eq!(err["error"]["kind"], "multiple_steady_states");
    assert_eq!(err["error"]["exit_code"], 2);
}

#[test]
fn validate_preset_config_is_clean() {
    let dir = tempfile::tempdir().unwrap();
    let o = wgheat(dir.path(), &["validate", "--preset", "fig3", "--format", "json"]);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["status"], "ok");
    assert!(v["warnings"].as_array().unwrap().is_empty());
}

#[test]
fn validate_reports_fatal_problems() {
    let dir = tempfile::tempdir().unwrap();
    let o = wgheat(dir.path(), &["validate", "--preset", "fig3", "--set", "temp2=-1"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).contains("fatal"));
}

#[test]
fn evolve_emits_trajectory() {
    let dir = tempfile::tempdir().unwrap();
    let o = wgheat(dir.path(), &["evolve", "--preset", "fig5", "--t-final", "2", "--samples", "11", "--out", "t.csv"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let text = fs::read_to_string(dir.path().join("t.csv")).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 12);
    assert!(lines[0].starts_with("t,rho11,rho22,rho33,rho44,"));
    let last: Vec<f64> = lines[11].split(',').map(|s| s.parse().unwrap()).collect();
    assert_eq!(last[0], 2.0);
    let trace: f64 = last[1..5].iter().sum();
    assert!((trace - 1.0).abs() < 1e-12);
}

#[test]
fn sweep_runs_spec_file() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path());
    let base: serde_json::Value = serde_json::from_str(&fs::read_to_string(&cfg).unwrap()).unwrap();
    let spec = serde_json::json!({
        "base": base,
        "axes": [{"field": "rabi43", "logspace": [0.001, 1.0, 4]}],
        "observables": ["J_W1", "J_W2", "sigma", "rho11"]
    });
    fs::write(dir.path().join("spec.json"), spec.to_string()).unwrap();
    let serial = wgheat(dir.path(), &["sweep", "--config", "spec.json", "--workers", "1"]);
    let parallel = wgheat(dir.path(), &["sweep", "--config", "spec.json", "--workers", "3"]);
    assert_eq!(serial.status.code(), Some(0));
    assert_eq!(serial.stdout, parallel.stdout);
    let text = stdout(&serial);
    assert!(text.starts_with("Omega43,J_W1,J_W2,sigma,rho11,residual\n"));
    assert_eq!(text.lines().count(), 5);
}

#[test]
fn bad_invocation_is_input_error() {
    let dir = tempfile::tempdir().unwrap();
    let o = wgheat(dir.path(), &["steady"]);
    assert_eq!(o.status.code(), Some(1));
    let o = wgheat(dir.path(), &["frobnicate"]);
    assert_eq!(o.status.code(), Some(1));
}
