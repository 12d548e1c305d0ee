//! Binary-level tests: exit codes, file flows, and report schema.

use std::path::Path;
use std::process::{Command, Output};

fn crowdseg(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_crowdseg")).args(args).output().expect("spawn crowdseg")
}

fn assert_success(out: &Output) {
    assert!(
        out.status.success(),
        "command failed\nstdout: {}\nstderr: {}",
        String::from_utf8_lossy(&out.stdout),
        String::from_utf8_lossy(&out.stderr)
    );
}

fn synth_scene(dir: &Path, extra: &[&str]) {
    let mut args = vec![
        "synth",
        "--n-heads",
        "12",
        "--regime",
        "sparse",
        "--seed",
        "5",
        "--out",
        dir.to_str().unwrap(),
    ];
    args.extend_from_slice(extra);
    assert_success(&crowdseg(&args));
}

#[test]
fn unknown_flag_exits_one() {
    let out = crowdseg(&["eval", "--no-such-flag"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn unknown_subcommand_exits_one() {
    let out = crowdseg(&["frobnicate"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn help_exits_zero() {
    let out = crowdseg(&["--help"]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8_lossy(&out.stdout);
    for sub in ["synth", "dpmo", "select", "eval", "loss", "render", "pipeline"] {
        assert!(text.contains(sub), "--help must list `{sub}`");
    }
}

#[test]
fn missing_file_exits_two() {
    let out = crowdseg(&["eval", "--pred", "/nonexistent/p.json", "--gt", "/nonexistent/g.json"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("error:"));
}

#[test]
fn eval_identity_reports_perfect_scores() {
    let dir = tempfile::tempdir().unwrap();
    synth_scene(dir.path(), &[]);
    let masks = dir.path().join("masks.json");
    let report_path = dir.path().join("report.json");
    let out = crowdseg(&[
        "eval",
        "--pred",
        masks.to_str().unwrap(),
        "--gt",
        masks.to_str().unwrap(),
        "--report",
        report_path.to_str().unwrap(),
    ]);
    assert_success(&out);
    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&report_path).unwrap()).unwrap();
    assert_eq!(report["iou"], 1.0);
    assert_eq!(report["precision"], 1.0);
    assert_eq!(report["recall"], 1.0);
    assert_eq!(report["f1"], 1.0);
    assert_eq!(report["per_image"][0]["fn"], 0);
    // stdout carries the same report
    let stdout: serde_json::Value =
        serde_json::from_slice(&out.stdout).expect("stdout must be the report JSON");
    assert_eq!(stdout, report);
}

#[test]
fn dpmo_writes_masks_and_overlay() {
    let dir = tempfile::tempdir().unwrap();
    synth_scene(dir.path(), &[]);
    let out_masks = dir.path().join("pred.json");
    let overlay = dir.path().join("overlay.png");
    let out = crowdseg(&[
        "dpmo",
        "--points",
        dir.path().join("points.json").to_str().unwrap(),
        "--gt-masks",
        dir.path().join("masks.json").to_str().unwrap(),
        "--segmenter",
        "oracle",
        "--noise",
        "0",
        "--p-miss",
        "0",
        "--out",
        out_masks.to_str().unwrap(),
        "--render",
        overlay.to_str().unwrap(),
    ]);
    assert_success(&out);
    let masks = crowdseg::io::load_masks(&out_masks).unwrap();
    assert_eq!(masks.len(), 12);
    assert!(overlay.exists());

    // exact oracle at ground-truth prompts must evaluate perfectly enough
    let eval_out = crowdseg(&[
        "eval",
        "--pred",
        out_masks.to_str().unwrap(),
        "--gt",
        dir.path().join("masks.json").to_str().unwrap(),
    ]);
    assert_success(&eval_out);
    let report: serde_json::Value = serde_json::from_slice(&eval_out.stdout).unwrap();
    assert!(report["iou"].as_f64().unwrap() >= 0.95);
}

#[test]
fn file_backend_roundtrips_proposals() {
    let dir = tempfile::tempdir().unwrap();
    synth_scene(dir.path(), &[]);
    let out_masks = dir.path().join("pred.json");
    let out = crowdseg(&[
        "dpmo",
        "--points",
        dir.path().join("points.json").to_str().unwrap(),
        "--segmenter",
        "file",
        "--proposals",
        dir.path().join("masks.json").to_str().unwrap(),
        "--out",
        out_masks.to_str().unwrap(),
    ]);
    assert_success(&out);
    assert_eq!(crowdseg::io::load_masks(&out_masks).unwrap().len(), 12);
}

#[test]
fn loss_density_on_perfect_map_is_zero() {
    let dir = tempfile::tempdir().unwrap();
    synth_scene(dir.path(), &["--density", "perfect"]);
    let out = crowdseg(&[
        "loss",
        "density",
        "--map",
        dir.path().join("density.bin").to_str().unwrap(),
        "--masks",
        dir.path().join("masks.json").to_str().unwrap(),
    ]);
    assert_success(&out);
    let value: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert!(value["loss"].as_f64().unwrap() < 1e-9);
}

#[test]
fn loss_match_emits_pairs_and_cost() {
    let dir = tempfile::tempdir().unwrap();
    synth_scene(dir.path(), &[]);
    let points = dir.path().join("points.json");
    let masks = dir.path().join("masks.json");
    for method in ["three-case", "exact"] {
        let out = crowdseg(&[
            "loss",
            "match",
            "--pred",
            points.to_str().unwrap(),
            "--gt",
            points.to_str().unwrap(),
            "--masks",
            masks.to_str().unwrap(),
            "--method",
            method,
        ]);
        assert_success(&out);
        let value: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
        // predictions == ground truth: identity matching at zero cost
        assert_eq!(value["pairs"].as_array().unwrap().len(), 12);
        assert_eq!(value["total_cost"].as_f64().unwrap(), 0.0);
        assert!(value["unmatched_pred"].as_array().unwrap().is_empty());
    }
}

#[test]
fn select_trains_and_selects() {
    let dir = tempfile::tempdir().unwrap();
    synth_scene(dir.path(), &[]);
    let scorer = dir.path().join("scorer.json");
    let selected = dir.path().join("selected.json");
    let trained_arg = format!("trained:{}", scorer.display());
    let out = crowdseg(&[
        "select",
        "--points",
        dir.path().join("points.json").to_str().unwrap(),
        "--gt-masks",
        dir.path().join("masks.json").to_str().unwrap(),
        "--segmenter",
        "oracle",
        "--noise",
        "0",
        "--p-miss",
        "0",
        "--sigma",
        "1",
        "--seed",
        "3",
        "--train-scorer",
        scorer.to_str().unwrap(),
        "--scorer",
        &trained_arg,
        "--out",
        selected.to_str().unwrap(),
    ]);
    assert_success(&out);
    assert!(scorer.exists());
    let picked = crowdseg::io::load_points(&selected).unwrap();
    assert_eq!(picked.points.len(), 12);

    // reward-oracle selection from the same inputs
    let out = crowdseg(&[
        "select",
        "--points",
        dir.path().join("points.json").to_str().unwrap(),
        "--gt-masks",
        dir.path().join("masks.json").to_str().unwrap(),
        "--segmenter",
        "oracle",
        "--noise",
        "0",
        "--p-miss",
        "0",
        "--sigma",
        "1",
        "--seed",
        "3",
        "--scorer",
        "reward-oracle",
        "--out",
        selected.to_str().unwrap(),
    ]);
    assert_success(&out);
}

#[test]
fn select_rejects_other_group_sizes() {
    let dir = tempfile::tempdir().unwrap();
    synth_scene(dir.path(), &[]);
    let out = crowdseg(&[
        "select",
        "--points",
        dir.path().join("points.json").to_str().unwrap(),
        "--gt-masks",
        dir.path().join("masks.json").to_str().unwrap(),
        "--group-size",
        "7",
        "--scorer",
        "reward-oracle",
        "--out",
        dir.path().join("sel.json").to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn render_draws_overlay() {
    let dir = tempfile::tempdir().unwrap();
    synth_scene(dir.path(), &[]);
    let overlay = dir.path().join("overlay.png");
    let out = crowdseg(&[
        "render",
        "--points",
        dir.path().join("points.json").to_str().unwrap(),
        "--masks",
        dir.path().join("masks.json").to_str().unwrap(),
        "--out",
        overlay.to_str().unwrap(),
    ]);
    assert_success(&out);
    let img = image::open(&overlay).unwrap();
    assert_eq!(img.width(), 768);
}

#[test]
fn pipeline_accepts_scene_files_and_config() {
    let dir = tempfile::tempdir().unwrap();
    synth_scene(dir.path(), &[]);
    let config = dir.path().join("config.json");
    std::fs::write(&config, r#"{"seed": 11, "sigma": 0.5, "noise": 0, "p_miss": 0.0}"#).unwrap();
    let report_path = dir.path().join("report.json");
    let out = crowdseg(&[
        "pipeline",
        "--config",
        config.to_str().unwrap(),
        "--scene-points",
        dir.path().join("points.json").to_str().unwrap(),
        "--scene-masks",
        dir.path().join("masks.json").to_str().unwrap(),
        "--segmenter",
        "oracle",
        "--report",
        report_path.to_str().unwrap(),
    ]);
    assert_success(&out);
    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&report_path).unwrap()).unwrap();
    assert!(report["iou"].as_f64().unwrap() > 0.5);
    assert_eq!(report["per_image"].as_array().unwrap().len(), 1);
}

#[test]
fn synth_is_deterministic_per_seed() {
    let dir_a = tempfile::tempdir().unwrap();
    let dir_b = tempfile::tempdir().unwrap();
    synth_scene(dir_a.path(), &[]);
    synth_scene(dir_b.path(), &[]);
    for name in ["points.json", "masks.json"] {
        assert_eq!(
            std::fs::read(dir_a.path().join(name)).unwrap(),
            std::fs::read(dir_b.path().join(name)).unwrap(),
            "{name} differs between identical synth runs"
        );
    }
}
