use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_sumbrella"))
}

fn crate_file(rel: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join(rel)
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exited")
}

#[test]
fn run_writes_identical_traces() {
    let dir = tempfile::tempdir().unwrap();
    let scenario = crate_file("scenarios/crowd_withdrawal.json");
    let mut outputs = Vec::new();
    for name in ["a.jsonl", "b.jsonl"] {
        let path = dir.path().join(name);
        let o = bin()
            .args(["run", scenario.to_str().unwrap(), "--trace", path.to_str().unwrap(), "--format", "jsonl", "--seed", "5"])
            .output()
            .unwrap();
        assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
        assert!(String::from_utf8_lossy(&o.stderr).contains("withdrawal"));
        outputs.push(std::fs::read(path).unwrap());
    }
    assert_eq!(outputs[0], outputs[1]);
    assert_eq!(outputs[0].iter().filter(|&&b| b == b'\n').count(), 500);
}

#[test]
fn run_without_trace_prints_csv() {
    let o = bin().args(["run", crate_file("scenarios/confined_avoidance.json").to_str().unwrap()]).output().unwrap();
    assert_eq!(code(&o), 0);
    let stdout = String::from_utf8(o.stdout).unwrap();
    assert!(stdout.starts_with("tick,t_s,fsm_mode,"));
    assert_eq!(stdout.lines().count(), 501);
}

#[test]
fn run_with_config_file() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("c.json");
    std::fs::write(&cfg, r#"{"behavior":{"debounce_frames":3}}"#).unwrap();
    let o = bin()
        .args(["run", crate_file("scenarios/crowd_withdrawal.json").to_str().unwrap(), "--config", cfg.to_str().unwrap()])
        .output()
        .unwrap();
    assert_eq!(code(&o), 0);
    assert!(String::from_utf8_lossy(&o.stderr).contains("tick    61  withdrawal"), "{}", String::from_utf8_lossy(&o.stderr));
}

#[test]
fn validation_failures_exit_1() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, r#"{"meta":{"duration_s":2},"events":[{"t":-1,"kind":"release_override"}]}"#).unwrap();
    for args in [vec!["validate", bad.to_str().unwrap()], vec!["run", bad.to_str().unwrap()]] {
        let o = bin().args(&args).output().unwrap();
        assert_eq!(code(&o), 1);
        assert!(String::from_utf8_lossy(&o.stderr).contains("events[0].t"));
    }
    let o = bin().args(["validate", "/nonexistent/scenario.json"]).output().unwrap();
    assert_eq!(code(&o), 1);

    let cfg = dir.path().join("c.json");
    std::fs::write(&cfg, r#"{"plant":{"alhpa":1}}"#).unwrap();
    let o = bin()
        .args(["run", crate_file("scenarios/crowd_withdrawal.json").to_str().unwrap(), "--config", cfg.to_str().unwrap()])
        .output()
        .unwrap();
    assert_eq!(code(&o), 1);
}

#[test]
fn validate_bundled() {
    for name in ["approach_and_retreat", "crowd_withdrawal", "confined_avoidance", "manual_presets"] {
        let o = bin().args(["validate", crate_file(&format!("scenarios/{name}.json")).to_str().unwrap()]).output().unwrap();
        assert_eq!(code(&o), 0);
    }
}

#[test]
fn burst_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let s = dir.path().join("burst.json");
    std::fs::write(
        &s,
        r#"{"meta":{"duration_s":10},"config_overrides":{"pneumatics.p_max_kpa":80,"behavior.p_inflate_kpa":75}}"#,
    )
    .unwrap();
    let o = bin().args(["run", s.to_str().unwrap()]).output().unwrap();
    assert_eq!(code(&o), 2);
    assert!(String::from_utf8_lossy(&o.stderr).contains("tick"));
}

#[test]
fn fuzz_reports_json() {
    let o = bin().args(["fuzz-protocol", "--n", "2000", "--seed", "7"]).output().unwrap();
    assert_eq!(code(&o), 0);
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["round_trips"], 2000);
    assert_eq!(v["undetected_corruptions"], 0);
    assert_eq!(v["failures"].as_array().unwrap().len(), 0);

    let o = bin().args(["fuzz-protocol", "--n", "0", "--seed", "7"]).output().unwrap();
    assert_eq!(code(&o), 1);
}

#[test]
fn pid_step_writes_report() {
    let dir = tempfile::tempdir().unwrap();
    let report = dir.path().join("r.json");
    let o = bin().args(["pid-step", "--target", "25", "--report", report.to_str().unwrap()]).output().unwrap();
    assert_eq!(code(&o), 0);
    let v: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(report).unwrap()).unwrap();
    assert!(v["settling_time_s"].as_f64().unwrap() <= 3.0);
    assert!(v["steady_state_error_kpa"].as_f64().unwrap() <= 0.5);

    let o = bin().args(["pid-step", "--target", "99"]).output().unwrap();
    assert_eq!(code(&o), 1);
}

#[test]
fn replay_log() {
    let o = bin().args(["replay", crate_file("data/detections.jsonl").to_str().unwrap()]).output().unwrap();
    assert_eq!(code(&o), 0);
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("skipped"));
    assert!(err.contains("avoidance[2]"));
}

#[test]
fn default_config_parses_back() {
    let o = bin().arg("default-config").output().unwrap();
    assert_eq!(code(&o), 0);
    let cfg = sumbrella::Config::from_json_str(std::str::from_utf8(&o.stdout).unwrap(), "stdout").unwrap();
    assert_eq!(cfg, sumbrella::Config::default());
    let shipped = sumbrella::Config::load(&crate_file("config/default.json")).unwrap();
    assert_eq!(shipped, sumbrella::Config::default());
}
