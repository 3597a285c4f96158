//! Smoke tests driving the compiled binary: every subcommand end to end,
//! plus failure modes for missing and invalid configs.

use std::path::{Path, PathBuf};
use std::process::Command;

fn gridpush() -> Command {
    Command::new(env!("CARGO_BIN_EXE_gridpush"))
}

fn coop_config() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs/coop.toml")
}

fn run_coop_into(out: &Path) {
    let output = gridpush()
        .arg("run")
        .arg("--config")
        .arg(coop_config())
        .arg("--out")
        .arg(out)
        .output()
        .expect("the binary must start");
    assert!(
        output.status.success(),
        "run failed: {}",
        String::from_utf8_lossy(&output.stderr)
    );
}

#[test]
fn run_writes_manifest_and_artifacts() {
    let out = tempfile::tempdir().expect("tempdir");
    let output = gridpush()
        .arg("run")
        .arg("--config")
        .arg(coop_config())
        .arg("--out")
        .arg(out.path())
        .output()
        .expect("the binary must start");
    assert!(
        output.status.success(),
        "run failed: {}",
        String::from_utf8_lossy(&output.stderr)
    );
    let stdout = String::from_utf8_lossy(&output.stdout);
    assert!(stdout.contains("completed 1/1 episodes"), "stdout: {stdout}");

    let manifest: serde_json::Value = serde_json::from_str(
        &std::fs::read_to_string(out.path().join("manifest.json")).expect("manifest written"),
    )
    .expect("manifest is JSON");
    assert_eq!(manifest["episodes_completed"], 1);
    assert!(manifest["error"].is_null());
    for file in [
        "trace_ep0001.jsonl",
        "metrics_ep0001.json",
        "timeline_ep0001.svg",
        "world_model.json",
        "tables/completion_matrix.csv",
        "tables/episode_series.csv",
        "tables/commitment_patterns.csv",
        "snapshots/world_model_ep0001.json",
        "snapshots/world_model_ep0001.dot",
    ] {
        assert!(out.path().join(file).exists(), "{file} missing from the output directory");
    }
}

#[test]
fn seed_override_changes_the_manifest_seed() {
    let out = tempfile::tempdir().expect("tempdir");
    let output = gridpush()
        .arg("run")
        .arg("--config")
        .arg(coop_config())
        .arg("--out")
        .arg(out.path())
        .args(["--seed", "42"])
        .output()
        .expect("the binary must start");
    assert!(output.status.success());
    let stdout = String::from_utf8_lossy(&output.stdout);
    assert!(stdout.contains("seed 42"), "stdout: {stdout}");
}

#[test]
fn render_timeline_writes_an_svg() {
    let out = tempfile::tempdir().expect("tempdir");
    run_coop_into(out.path());

    let svg_path = out.path().join("replay.svg");
    let output = gridpush()
        .arg("render-timeline")
        .arg("--trace")
        .arg(out.path().join("trace_ep0001.jsonl"))
        .arg("--out")
        .arg(&svg_path)
        .output()
        .expect("the binary must start");
    assert!(
        output.status.success(),
        "render-timeline failed: {}",
        String::from_utf8_lossy(&output.stderr)
    );
    let svg = std::fs::read_to_string(&svg_path).expect("SVG written");
    assert!(svg.contains("<svg"), "not an SVG: {}", &svg[..svg.len().min(120)]);
    assert!(svg.contains("class=\"agent-lane\""));
}

#[test]
fn export_graph_emits_json_and_dot() {
    let out = tempfile::tempdir().expect("tempdir");
    run_coop_into(out.path());
    let world = out.path().join("world_model.json");

    let json_out = gridpush()
        .arg("export-graph")
        .arg("--world")
        .arg(&world)
        .args(["--format", "json"])
        .output()
        .expect("the binary must start");
    assert!(json_out.status.success());
    let graph: serde_json::Value =
        serde_json::from_slice(&json_out.stdout).expect("stdout is a JSON graph");
    assert!(graph["episodes"].is_array());
    assert!(graph["edges"]["episode_task"].is_array());

    let dot_file = out.path().join("graph.dot");
    let dot_out = gridpush()
        .arg("export-graph")
        .arg("--world")
        .arg(&world)
        .args(["--format", "dot"])
        .arg("--out")
        .arg(&dot_file)
        .output()
        .expect("the binary must start");
    assert!(dot_out.status.success());
    let dot = std::fs::read_to_string(&dot_file).expect("DOT written");
    assert!(dot.starts_with("digraph"), "not DOT: {}", &dot[..dot.len().min(120)]);
}

#[test]
fn metrics_recomputes_from_saved_traces() {
    let out = tempfile::tempdir().expect("tempdir");
    run_coop_into(out.path());

    let output = gridpush()
        .arg("metrics")
        .arg("--traces")
        .arg(out.path())
        .output()
        .expect("the binary must start");
    assert!(
        output.status.success(),
        "metrics failed: {}",
        String::from_utf8_lossy(&output.stderr)
    );
    let stdout = String::from_utf8_lossy(&output.stdout);
    assert!(stdout.contains("episode 1:"), "stdout: {stdout}");
    assert!(stdout.contains("completion=100%"), "stdout: {stdout}");
}

#[test]
fn missing_config_fails_with_nonzero_exit() {
    let out = tempfile::tempdir().expect("tempdir");
    let output = gridpush()
        .arg("run")
        .args(["--config", "/nonexistent/experiment.toml"])
        .arg("--out")
        .arg(out.path())
        .output()
        .expect("the binary must start");
    assert!(!output.status.success(), "a missing config must fail the run");
    assert!(!output.stderr.is_empty(), "the failure must be reported on stderr");
}

#[test]
fn invalid_config_reports_a_validation_error() {
    let dir = tempfile::tempdir().expect("tempdir");
    let config_path = dir.path().join("bad.toml");
    // A weight-2 block cannot fit in a width-1 goal band.
    std::fs::write(
        &config_path,
        r#"
            episodes = 1

            [env]
            width = 10
            height = 6
            goal_band_width = 1
            max_steps = 50
            agent_starts = [{ x = 0, y = 0 }]

            [[env.blocks]]
            id = 1
            weight = 2
            anchor = { x = 3, y = 2 }

            [[agents]]
            kind = "baseline"
        "#,
    )
    .expect("config written");

    let output = gridpush()
        .arg("run")
        .arg("--config")
        .arg(&config_path)
        .arg("--out")
        .arg(dir.path().join("out"))
        .output()
        .expect("the binary must start");
    assert!(!output.status.success(), "an invalid config must fail the run");
    let stderr = String::from_utf8_lossy(&output.stderr);
    assert!(stderr.contains("CONFIG_INVALID"), "stderr: {stderr}");
}
