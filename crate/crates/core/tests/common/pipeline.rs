//! Drives the `augcomp` binary through oracle -> build-dataset -> derive-mask -> evaluate.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use augcomp::io;
use augcomp::oracle::OracleScene;

pub fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_augcomp"))
}

pub fn run_in(dir: &Path, args: &[&str]) -> Output {
    bin()
        .current_dir(dir)
        .args(args)
        .output()
        .expect("spawn augcomp")
}

pub fn ok_in(dir: &Path, args: &[&str]) -> String {
    let out = run_in(dir, args);
    assert!(
        out.status.success(),
        "augcomp {args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

pub fn write_spec(dir: &Path, scenes: &[OracleScene]) {
    fs::write(
        dir.join("scenes.json"),
        serde_json::to_string_pretty(scenes).unwrap(),
    )
    .unwrap();
}

pub struct PipelineRun {
    pub iou: Vec<f64>,
    pub report: serde_json::Value,
}

/// Runs the full pipeline inside `dir` using relative paths only.
pub fn run_pipeline(dir: &Path, scenes: &[OracleScene]) -> PipelineRun {
    write_spec(dir, scenes);
    ok_in(dir, &["--seed", "7", "oracle", "scenes.json", "layers"]);
    let unpaired = dir.join("layers/zz_unpaired");
    fs::create_dir_all(&unpaired).unwrap();
    let src = io::read_clip(&dir.join("layers/oracle_000/gt")).unwrap();
    io::write_clip(&unpaired.join("gt"), &src).unwrap();
    fs::write(unpaired.join("caption.txt"), "an empty street\n").unwrap();

    ok_in(
        dir,
        &[
            "--seed",
            "7",
            "build-dataset",
            "layers",
            "data/manifest.ndjson",
        ],
    );
    let mut iou = Vec::new();
    for i in 0..scenes.len() {
        let id = format!("oracle_{i:03}");
        let out = format!("derived/{id}");
        ok_in(
            dir,
            &[
                "--seed",
                "7",
                "derive-mask",
                &format!("data/{id}/gt"),
                &format!("data/{id}/over"),
                &format!("layers/{id}/subject"),
                &out,
                "--gray-prob",
                "0.25",
            ],
        );
        let derived = io::read_binary_mask(&dir.join(&out).join("effect")).unwrap();
        let truth = io::read_binary_mask(&dir.join(format!("layers/{id}/effect_truth"))).unwrap();
        iou.push(derived.iou(&truth).unwrap());
    }
    ok_in(
        dir,
        &[
            "evaluate",
            "data/oracle_000/gt",
            "data/oracle_000/over",
            "data/oracle_000/gt",
            "reports/self.json",
            "--caption",
            "a box moves and casts a shadow",
        ],
    );
    let report =
        serde_json::from_str(&fs::read_to_string(dir.join("reports/self.json")).unwrap()).unwrap();
    PipelineRun { iou, report }
}

/// Relative path -> bytes for every file under `root`.
pub fn snapshot(root: &Path) -> BTreeMap<PathBuf, Vec<u8>> {
    let mut out = BTreeMap::new();
    let mut stack = vec![root.to_path_buf()];
    while let Some(d) = stack.pop() {
        for e in fs::read_dir(&d).unwrap() {
            let p = e.unwrap().path();
            if p.is_dir() {
                stack.push(p);
            } else {
                out.insert(
                    p.strip_prefix(root).unwrap().to_path_buf(),
                    fs::read(&p).unwrap(),
                );
            }
        }
    }
    out
}
