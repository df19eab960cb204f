mod common;

use std::fs;

use augcomp::clip::VideoClip;
use augcomp::dataset::read_manifest;
use augcomp::io;
use augcomp::oracle::OracleScene;
use common::pipeline::{ok_in, run_in, run_pipeline, snapshot, write_spec};
use tempfile::tempdir;

fn scenes(n: u64) -> Vec<OracleScene> {
    (0..n)
        .map(|s| OracleScene::seeded(100 + s, 12, 64, 64))
        .collect()
}

fn error_record(out: &std::process::Output) -> serde_json::Value {
    let stderr = String::from_utf8_lossy(&out.stderr);
    let last = stderr.lines().last().expect("error record on stderr");
    serde_json::from_str(last).expect("machine-readable error record")
}

#[test]
fn end_to_end_pipeline() {
    let dir = tempdir().unwrap();
    let run = run_pipeline(dir.path(), &scenes(2));
    for iou in &run.iou {
        assert!(*iou >= 0.9, "iou {iou}");
    }
    assert!((run.report["ssim"]["mean"].as_f64().unwrap() - 1.0).abs() <= 1e-9);
    assert_eq!(run.report["psnr"]["mean"].as_f64().unwrap(), 100.0);
    assert!((run.report["clip_dir"]["mean"].as_f64().unwrap() - 100.0).abs() <= 1e-9);
    assert!(run.report["external"]["lpips"].is_null());

    let m = read_manifest(&dir.path().join("data/manifest.ndjson")).unwrap();
    let ids: Vec<_> = m.samples.iter().map(|s| s.id.as_str()).collect();
    assert_eq!(ids, ["oracle_000", "oracle_001", "zz_unpaired"]);
    assert!(m.samples[2].over.is_none());

    let stats: serde_json::Value =
        serde_json::from_str(&ok_in(dir.path(), &["stats", "data/manifest.ndjson"])).unwrap();
    assert_eq!(stats["total_samples"], 3);
    assert_eq!(stats["counts"]["paired_synthetic"], 2);
    assert_eq!(stats["counts"]["unpaired"], 1);
    assert_eq!(stats["total_frames"], 36);
}

#[test]
fn reruns_are_byte_identical() {
    let a = tempdir().unwrap();
    let b = tempdir().unwrap();
    run_pipeline(a.path(), &scenes(2));
    run_pipeline(b.path(), &scenes(2));
    let (sa, sb) = (snapshot(a.path()), snapshot(b.path()));
    assert_eq!(sa.keys().collect::<Vec<_>>(), sb.keys().collect::<Vec<_>>());
    for (k, v) in &sa {
        assert!(sb[k] == *v, "{} differs between runs", k.display());
    }
}

#[test]
fn dry_run_writes_nothing() {
    let dir = tempdir().unwrap();
    let d = dir.path();
    write_spec(d, &scenes(1));
    ok_in(d, &["--dry-run", "oracle", "scenes.json", "dry_layers"]);
    assert!(!d.join("dry_layers").exists());

    ok_in(d, &["oracle", "scenes.json", "layers"]);
    let before = snapshot(d);
    ok_in(
        d,
        &[
            "--dry-run",
            "build-dataset",
            "layers",
            "data/manifest.ndjson",
        ],
    );
    ok_in(
        d,
        &[
            "--dry-run",
            "derive-mask",
            "layers/oracle_000/gt",
            "layers/oracle_000/over",
            "layers/oracle_000/subject",
            "out",
        ],
    );
    ok_in(
        d,
        &[
            "--dry-run",
            "compose",
            "layers/oracle_000/fg",
            "layers/oracle_000/bg",
            "comp",
            "--alpha",
            "layers/oracle_000/alpha",
        ],
    );
    ok_in(
        d,
        &[
            "--dry-run",
            "evaluate",
            "layers/oracle_000/gt",
            "layers/oracle_000/over",
            "layers/oracle_000/gt",
            "r.json",
        ],
    );
    assert_eq!(snapshot(d), before);
}

#[test]
fn compose_reproduces_ground_truth() {
    let dir = tempdir().unwrap();
    let d = dir.path();
    write_spec(d, &scenes(1));
    ok_in(d, &["oracle", "scenes.json", "layers"]);
    ok_in(
        d,
        &[
            "compose",
            "layers/oracle_000/fg",
            "layers/oracle_000/bg",
            "comp",
            "--alpha",
            "layers/oracle_000/alpha",
        ],
    );
    ok_in(
        d,
        &[
            "compose",
            "layers/oracle_000/fg",
            "layers/oracle_000/bg",
            "nofx",
            "--subject",
            "layers/oracle_000/subject",
        ],
    );
    let gt = io::read_clip(&d.join("layers/oracle_000/gt")).unwrap();
    let comp = io::read_clip(&d.join("comp")).unwrap();
    let max = |a: &VideoClip, b: &VideoClip| {
        a.as_slice()
            .iter()
            .zip(b.as_slice())
            .map(|(x, y)| (x - y).abs())
            .fold(0.0f32, f32::max)
    };
    // Layers pass through 8-bit files, so agreement is to a couple of code values.
    assert!(max(&gt, &comp) <= 2.5 / 255.0);
    assert_eq!(
        io::read_clip(&d.join("nofx")).unwrap(),
        io::read_clip(&d.join("layers/oracle_000/over")).unwrap()
    );
}

#[test]
fn exit_codes() {
    let dir = tempdir().unwrap();
    let d = dir.path();

    let out = run_in(
        d,
        &["plan-windows", "100", "--window", "85", "--stride", "90"],
    );
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(error_record(&out)["exit_code"], 2);

    let out = run_in(
        d,
        &["derive-mask", "nope/gt", "nope/over", "nope/subject", "out"],
    );
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(error_record(&out)["error"], "missing_asset");

    write_spec(d, &scenes(1));
    ok_in(d, &["oracle", "scenes.json", "layers"]);
    let bg_dir = d.join("layers/oracle_000/bg");
    let bg = io::read_clip(&bg_dir).unwrap();
    let w = bg.width();
    let shifted = VideoClip::from_fn(bg.dims(), |t, y, x| bg.pixel(t, y, (x + 10) % w)).unwrap();
    fs::remove_dir_all(&bg_dir).unwrap();
    io::write_clip(&bg_dir, &shifted).unwrap();
    let out = run_in(d, &["build-dataset", "layers", "data/manifest.ndjson"]);
    assert_eq!(out.status.code(), Some(3));
    assert_eq!(error_record(&out)["error"], "data_quality");
    assert!(!d.join("data/manifest.ndjson").exists());

    let g = "layers/oracle_000/gt";
    let out = run_in(
        d,
        &[
            "evaluate",
            g,
            "layers/oracle_000/over",
            g,
            "r.json",
            "--provider",
            "false",
        ],
    );
    assert_eq!(out.status.code(), Some(4));
    assert!(!d.join("r.json").exists());
}

#[test]
fn evaluate_through_external_mock_provider() {
    let dir = tempdir().unwrap();
    let d = dir.path();
    write_spec(d, &scenes(1));
    ok_in(d, &["oracle", "scenes.json", "layers"]);
    let provider = format!("{} mock-provider", env!("CARGO_BIN_EXE_augcomp"));
    let g = "layers/oracle_000/gt";
    ok_in(
        d,
        &[
            "evaluate",
            g,
            "layers/oracle_000/over",
            g,
            "ext.json",
            "--provider",
            &provider,
        ],
    );
    ok_in(
        d,
        &["evaluate", g, "layers/oracle_000/over", g, "mock.json"],
    );
    let ext: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(d.join("ext.json")).unwrap()).unwrap();
    let mock: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(d.join("mock.json")).unwrap()).unwrap();
    assert_eq!(ext["provider"], provider.as_str());
    assert!((ext["clip_dir"]["mean"].as_f64().unwrap() - 100.0).abs() <= 1e-6);
    assert_eq!(ext["ssim"], mock["ssim"]);
}

#[test]
fn plan_windows_prints_two_window_plan() {
    let dir = tempdir().unwrap();
    let out = ok_in(
        dir.path(),
        &["plan-windows", "149", "--window", "85", "--stride", "64"],
    );
    let v: serde_json::Value = serde_json::from_str(&out).unwrap();
    assert_eq!(v["windows"], serde_json::json!([[0, 85], [64, 149]]));
    assert_eq!(v["total_frames"], 149);
    let w0 = &v["weights"][0];
    for f in 64..85 {
        let expected = (85 - f) as f64 / 22.0;
        assert!((w0[f].as_f64().unwrap() - expected).abs() <= 1e-12);
    }
}

#[test]
fn json_logging() {
    let dir = tempdir().unwrap();
    let d = dir.path();
    write_spec(d, &scenes(1));
    ok_in(d, &["oracle", "scenes.json", "layers"]);
    let out = run_in(
        d,
        &["--log-json", "build-dataset", "layers", "data/m.ndjson"],
    );
    assert!(out.status.success());
    let stderr = String::from_utf8(out.stderr).unwrap();
    assert!(!stderr.is_empty());
    for line in stderr.lines() {
        let v: serde_json::Value = serde_json::from_str(line).unwrap();
        assert!(v["level"].is_string() && v["message"].is_string());
    }
}
