use std::process::Command;

fn sim(args: &[&str]) -> (i32, String, String) {
    let out = Command::new(env!("CARGO_BIN_EXE_acool-sim"))
        .args(args)
        .env_clear()
        .output()
        .expect("binary runs");
    (
        out.status.code().unwrap_or(-1),
        String::from_utf8_lossy(&out.stdout).into_owned(),
        String::from_utf8_lossy(&out.stderr).into_owned(),
    )
}

#[test]
fn run_crash_silent_outputs_agree() {
    let (code, stdout, _) = sim(&[
        "run", "--protocol", "acool", "--n", "4", "--t", "1", "--len", "1024", "--adversary", "crash_silent", "--seed", "7",
    ]);
    assert_eq!(code, 0);
    let report: serde_json::Value = serde_json::from_str(&stdout).unwrap();
    let outputs = report["outputs"].as_array().unwrap();
    let byz: Vec<usize> = report["byzantine"].as_array().unwrap().iter().map(|v| v.as_u64().unwrap() as usize).collect();
    let honest: Vec<&serde_json::Value> =
        outputs.iter().enumerate().filter(|(i, _)| !byz.contains(i)).map(|(_, o)| o).collect();
    assert_eq!(honest.len(), 3);
    assert!(!honest[0].is_null());
    assert!(honest.iter().all(|o| *o == honest[0]));
}

#[test]
fn split_input_scenario_exits_zero() {
    let (code, _, _) = sim(&["run", "--scenario", "split-input", "--n", "7", "--t", "2"]);
    assert_eq!(code, 0);
}

#[test]
fn resilience_violation_exits_one() {
    let (code, _, stderr) = sim(&["run", "--n", "3", "--t", "1"]);
    assert_eq!(code, 1);
    assert!(stderr.contains("ResilienceViolation"), "{stderr}");
}

#[test]
fn bad_flag_exits_one() {
    assert_eq!(sim(&["run", "--no-such-flag"]).0, 1);
    assert_eq!(sim(&["run", "--adversary", "nonsense"]).0, 1);
}

#[test]
fn legacy_wiring_reports_liveness_failure() {
    let (code, _, _) = sim(&["run", "--scenario", "split-input", "--n", "7", "--t", "2", "--legacy-cool"]);
    assert_eq!(code, 3);
}

#[test]
fn scenario_list_shows_partitions() {
    let (code, stdout, _) = sim(&["scenario-list"]);
    assert_eq!(code, 0);
    assert!(stdout.contains("split-input"), "{stdout}");
}

#[test]
fn sweep_prints_csv() {
    let (code, stdout, _) = sim(&["sweep", "--ns", "4,7", "--lens", "256", "--seeds", "1"]);
    assert_eq!(code, 0);
    let lines: Vec<&str> = stdout.lines().collect();
    assert_eq!(lines.len(), 3);
    assert!(lines[0].starts_with("protocol,n,t,len"));
    assert!(lines[1].starts_with("acool,4,1,256"));
}

#[test]
fn csv_run_over_seeds() {
    let (code, stdout, _) = sim(&["run", "--n", "4", "--t", "1", "--seeds", "3", "--format", "csv"]);
    assert_eq!(code, 0);
    assert_eq!(stdout.lines().count(), 4);
}
