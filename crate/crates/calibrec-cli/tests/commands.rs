//! Integration tests for the pipeline commands and the binary's exit-code
//! contract (0 ok, 1 config, 2 data, 3 runtime).

use std::path::{Path, PathBuf};
use std::process::Command;

use calibrec_cli::commands::{cmd_evaluate, cmd_simulate, cmd_train};
use calibrec_cli::config::{ExperimentConfig, PolicyConfig, PolicyKind};
use calibrec_cli::CliError;

fn default_config_path() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../default.experiment")
}

fn temp_dir(tag: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("calibrec-cmd-{tag}-{}", std::process::id()));
    std::fs::create_dir_all(&dir).expect("temp dir");
    dir
}

fn small_config(out_dir: &Path) -> ExperimentConfig {
    let mut config = ExperimentConfig::load(default_config_path()).unwrap();
    config.output_dir = out_dir.to_path_buf();
    config.sim.num_users = 120;
    config.sim.horizon_days = 10;
    config.sim.train_days = 7;
    config.train.epochs = 3;
    config.ope.bootstrap_resamples = 100;
    config
}

fn line_count(path: &Path) -> usize {
    std::fs::read_to_string(path).unwrap().lines().count()
}

#[test]
fn simulate_counts_match_metadata() {
    let dir = temp_dir("sim-counts");
    let config = small_config(&dir);
    let summary = cmd_simulate(&config, None, None).unwrap();
    assert!(!summary.eval_split_empty);
    assert_eq!(summary.metadata.train_triplets, line_count(&dir.join("train_triplets.jsonl")));
    assert_eq!(summary.metadata.train_triplets, line_count(&dir.join("train_episodes.jsonl")));
    assert_eq!(summary.metadata.eval_triplets, line_count(&dir.join("eval_triplets.jsonl")));
    assert_eq!(summary.metadata.eval_triplets, line_count(&dir.join("eval_episodes.jsonl")));
    std::fs::remove_dir_all(&dir).ok();
}

#[test]
fn one_day_horizon_leaves_eval_empty_with_warning_flag() {
    let dir = temp_dir("sim-short");
    let mut config = small_config(&dir);
    config.sim.horizon_days = 1;
    let summary = cmd_simulate(&config, None, None).unwrap();
    assert!(summary.eval_split_empty);
    assert_eq!(summary.metadata.eval_triplets, 0);
    assert_eq!(line_count(&dir.join("eval_triplets.jsonl")), 0);
    std::fs::remove_dir_all(&dir).ok();
}

#[test]
fn corrupt_triplet_line_is_a_data_error_with_line_number() {
    let dir = temp_dir("train-corrupt");
    let config = small_config(&dir);
    let path = dir.join("triplets.jsonl");
    std::fs::write(
        &path,
        "{\"features\":[0.1],\"action_index\":0,\"propensity\":0.5,\"reward\":1,\"timestamp\":0}\n{broken\n",
    )
    .unwrap();
    let err = cmd_train(&config, &path, None).unwrap_err();
    match err {
        CliError::Data(message) => assert!(message.contains(":2:"), "missing line number: {message}"),
        other => panic!("expected data error, got {other}"),
    }
    std::fs::remove_dir_all(&dir).ok();
}

#[test]
fn evaluate_emits_one_row_per_policy_and_cap() {
    let dir = temp_dir("eval-rows");
    let mut config = small_config(&dir);
    // Two identical sc90 declarations: their scores must coincide exactly,
    // so any self-comparison lift is exactly zero.
    config.policies = vec![
        PolicyConfig { name: "uniform".into(), kind: PolicyKind::Uniform },
        PolicyConfig { name: "oracle".into(), kind: PolicyKind::Oracle },
        PolicyConfig { name: "sc90".into(), kind: PolicyKind::Sc { window_days: 90 } },
        PolicyConfig { name: "sc90twin".into(), kind: PolicyKind::Sc { window_days: 90 } },
    ];
    config.evaluate.baseline = "uniform".into();
    config.abtest.treatment = "oracle".into();
    config.abtest.control = "sc90".into();
    config.validate().unwrap();

    cmd_simulate(&config, None, None).unwrap();
    // A checkpoint is mandatory even when no bandit policy is declared; a
    // tiny training run provides one.
    cmd_train(&config, &dir.join("train_triplets.jsonl"), None).unwrap();
    let rows = cmd_evaluate(
        &config,
        &dir.join("eval_triplets.jsonl"),
        &dir.join("eval_episodes.jsonl"),
        &dir.join("model.ckpt"),
        None,
    )
    .unwrap();

    assert_eq!(rows.len(), config.policies.len() * config.ope.cap_sweep.len());
    for cap in &config.ope.cap_sweep {
        let sc90 = rows.iter().find(|r| r.policy == "sc90" && r.cap == *cap).unwrap();
        let twin = rows.iter().find(|r| r.policy == "sc90twin" && r.cap == *cap).unwrap();
        assert_eq!(sc90.capped_ips_value, twin.capped_ips_value);
        assert_eq!(sc90.podcast_p1, twin.podcast_p1);
        assert_eq!(sc90.value_lift_pct, twin.value_lift_pct);
    }
    // Baseline rows carry no lift against themselves.
    assert!(rows.iter().filter(|r| r.policy == "uniform").all(|r| r.value_lift_pct.is_none()));
    // The ground-truth oracle must look better than uniform at the default cap.
    let oracle = rows.iter().find(|r| r.policy == "oracle" && r.cap == config.ope.cap).unwrap();
    assert!(oracle.value_lift_pct.unwrap() > 0.0, "oracle lift {:?}", oracle.value_lift_pct);
    assert!(dir.join("evaluation.csv").exists());
    assert!(dir.join("evaluation.json").exists());
    std::fs::remove_dir_all(&dir).ok();
}

// ---------------------------------------------------------------------------
// Binary exit codes
// ---------------------------------------------------------------------------

fn binary() -> Command {
    Command::new(env!("CARGO_BIN_EXE_calibrec"))
}

#[test]
fn exit_code_zero_for_help() {
    let status = binary().arg("--help").output().unwrap();
    assert!(status.status.success());
}

#[test]
fn exit_code_one_for_missing_config() {
    let out = binary()
        .args(["simulate", "--config", "/nonexistent/experiment.toml"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn exit_code_one_for_bad_usage() {
    let out = binary().arg("frobnicate").output().unwrap();
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn exit_code_two_for_corrupt_data() {
    let dir = temp_dir("exit-two");
    let bad = dir.join("bad.jsonl");
    std::fs::write(&bad, "not json\n").unwrap();
    let out = binary()
        .args([
            "train",
            "--config",
            default_config_path().to_str().unwrap(),
            "--triplets",
            bad.to_str().unwrap(),
            "--out",
            dir.to_str().unwrap(),
        ])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    std::fs::remove_dir_all(&dir).ok();
}

#[test]
fn exit_code_three_for_unwritable_output() {
    let out = binary()
        .args([
            "simulate",
            "--config",
            default_config_path().to_str().unwrap(),
            "--out",
            "/dev/null/nested/impossible",
        ])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(3));
}
