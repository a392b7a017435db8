//! End-to-end checks of the `magloc` binary.

use std::process::Command;

fn magloc() -> Command {
    Command::new(env!("CARGO_BIN_EXE_magloc"))
}

fn run_ok(cmd: &mut Command) -> String {
    let output = cmd.output().expect("binary runs");
    assert!(
        output.status.success(),
        "command failed\nstdout: {}\nstderr: {}",
        String::from_utf8_lossy(&output.stdout),
        String::from_utf8_lossy(&output.stderr)
    );
    String::from_utf8(output.stdout).expect("utf-8 output")
}

#[test]
fn simulate_then_localize_recovers_the_pose() {
    let dir = tempfile::tempdir().unwrap();
    let readings = dir.path().join("readings.csv");
    run_ok(magloc()
        .args(["simulate", "--position-mm", "5,-10,40"])
        .args(["--orientation", "0,0.6,0.8", "--frames", "1", "--seed", "9"])
        .args(["--out"])
        .arg(&readings));
    assert!(readings.exists());

    let stdout = run_ok(magloc()
        .args(["localize", "--readings"])
        .arg(&readings)
        .args(["--truth-position-mm", "5,-10,40"])
        .args(["--truth-orientation", "0,0.6,0.8", "--json"]));
    let report: serde_json::Value = serde_json::from_str(&stdout).unwrap();
    assert_eq!(report["converged"], true);
    // Noiseless except quantization: recovery to well under a millimeter.
    assert!(report["error"]["ep_mm"].as_f64().unwrap() < 0.1);
    assert!(report["error"]["theta_deg"].as_f64().unwrap() < 0.5);
}

#[test]
fn simulate_writes_stream_csv_to_stdout() {
    let stdout = run_ok(magloc().args(["simulate", "--frames", "2", "--seed", "1"]));
    let mut lines = stdout.lines();
    assert_eq!(lines.next().unwrap(), "frame,sensor,bx,by,bz,saturated");
    // 2 frames x 20 sensors
    assert_eq!(lines.count(), 40);
}

#[test]
fn experiment_preset_writes_run_directory() {
    let dir = tempfile::tempdir().unwrap();
    run_ok(magloc()
        .args(["experiment", "five_positions", "--trials", "2", "--seed", "3"])
        .args(["--out-dir"])
        .arg(dir.path()));
    let run_dir = dir.path().join("five_positions");
    for file in ["results.csv", "aggregates.csv", "meta.json"] {
        assert!(run_dir.join(file).exists(), "{file} missing");
    }
    let results = std::fs::read_to_string(run_dir.join("results.csv")).unwrap();
    assert_eq!(results.lines().count(), 1 + 5 * 2);
}

#[test]
fn experiment_same_seed_is_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    for out in [&a, &b] {
        run_ok(magloc()
            .args(["experiment", "height_sweep", "--trials", "3", "--seed", "12"])
            .args(["--out-dir"])
            .arg(out));
    }
    let left = std::fs::read(a.join("height_sweep/results.csv")).unwrap();
    let right = std::fs::read(b.join("height_sweep/results.csv")).unwrap();
    assert_eq!(left, right);
}

#[test]
fn filter_compare_emits_both_branches() {
    let dir = tempfile::tempdir().unwrap();
    run_ok(magloc()
        .args(["filter-compare", "--trials", "2"])
        .args(["--out-dir"])
        .arg(dir.path()));
    let results =
        std::fs::read_to_string(dir.path().join("filter_compare/results.csv")).unwrap();
    assert!(results.contains("filter_compare/filtered"));
    assert!(results.contains("filter_compare/raw"));
    let meta: serde_json::Value = serde_json::from_str(
        &std::fs::read_to_string(dir.path().join("filter_compare/meta.json")).unwrap(),
    )
    .unwrap();
    assert!(meta["noise_residual_stats_ut"]["x"].as_f64().unwrap() > 0.0);
}

#[test]
fn unknown_preset_fails_with_diagnostic() {
    let output = magloc()
        .args(["experiment", "not_a_preset"])
        .output()
        .unwrap();
    assert!(!output.status.success());
    let stderr = String::from_utf8_lossy(&output.stderr);
    assert!(stderr.contains("five_positions"), "stderr: {stderr}");
}

#[test]
fn bad_config_exits_nonzero() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.toml");
    std::fs::write(&bad, "name = \"x\"\nunknown_key = 1\n").unwrap();
    let output = magloc()
        .arg("experiment")
        .arg(&bad)
        .output()
        .unwrap();
    assert!(!output.status.success());
}

#[test]
fn array_file_round_trip_through_cli() {
    let dir = tempfile::tempdir().unwrap();
    let array = dir.path().join("array.txt");
    let readings = dir.path().join("readings.csv");
    run_ok(magloc()
        .args(["simulate", "--layout", "two_by_n:8", "--frames", "1"])
        .args(["--save-array"])
        .arg(&array)
        .args(["--out"])
        .arg(&readings));
    let text = std::fs::read_to_string(&array).unwrap();
    assert!(text.starts_with("# sensor array: 2xn-8"));
    // localizing with the saved array file must match sensor counts
    run_ok(magloc()
        .args(["localize", "--readings"])
        .arg(&readings)
        .args(["--array-file"])
        .arg(&array));
}
