//! Batch operations behind the `augcomp` binary. Each takes explicit paths and
//! parameters, validates every input before writing, and writes nothing when
//! `dry_run` is set.

use std::fs;
use std::path::{Path, PathBuf};

use log::info;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::compose::{compose_subject_over, over};
use crate::dataset::{
    build_paired_sample, build_unpaired_sample, dataset_stats, write_manifest, BuildOptions,
    DatasetSample, DatasetStats, Manifest, PairedLayers, SampleKind,
};
use crate::error::{Error, Result};
use crate::io;
use crate::mask::{derive_effect_mask, MorphParams};
use crate::metrics::{
    evaluate_pair, ClipIds, EmbeddingProvider, MetricReport, MockProvider, ProcessProvider,
};
use crate::oracle::{generate, OracleScene};
use crate::trimask;
use crate::windowing::{plan, WindowPlan};

/// Layer directories inside one sample folder of a layer root.
pub mod layout {
    pub const GT: &str = "gt";
    pub const FG: &str = "fg";
    pub const ALPHA: &str = "alpha";
    pub const BG: &str = "bg";
    pub const SUBJECT: &str = "subject";
    /// No-effect composite rendered by the oracle; not read by the dataset builder.
    pub const OVER: &str = "over";
    /// Exact effect footprint written by the oracle.
    pub const EFFECT_TRUTH: &str = "effect_truth";
    pub const CAPTION: &str = "caption.txt";
    /// Optional; `paired_real` (default for paired layers) or `paired_synthetic`.
    pub const KIND: &str = "kind.txt";
    pub const PROVENANCE: &str = "provenance.txt";
}

/// Exit status for an error: 2 validation, 3 data-quality rejection, 4 provider failure.
pub fn exit_code(err: &Error) -> i32 {
    match err {
        Error::DataQuality { .. } => 3,
        Error::Provider(_) => 4,
        _ => 2,
    }
}

fn require_dir(path: &Path) -> Result<()> {
    if path.is_dir() {
        Ok(())
    } else {
        Err(Error::MissingAsset(path.to_path_buf()))
    }
}

pub enum Matte<'a> {
    Alpha(&'a Path),
    Subject(&'a Path),
}

/// `over` with a soft alpha matte, or subject re-composition with a binary mask.
pub fn compose(fg: &Path, matte: Matte<'_>, bg: &Path, out: &Path, dry_run: bool) -> Result<()> {
    let fg = io::read_clip(fg)?;
    let bg = io::read_clip(bg)?;
    let result = match matte {
        Matte::Alpha(p) => over(&fg, &io::read_alpha(p)?, &bg)?,
        Matte::Subject(p) => compose_subject_over(&fg, &io::read_binary_mask(p)?, &bg)?,
    };
    if !dry_run {
        io::write_clip(out, &result)?;
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DeriveMaskMeta {
    pub threshold: Option<f32>,
    pub threshold_mode: String,
    pub params: MorphParams,
    pub effect_pixels: usize,
    pub gray_prob: f64,
    pub seed: u64,
    pub unknown_value: u8,
}

pub const DERIVE_META_FILE: &str = "derive.json";

/// Writes `out/effect` (binary), `out/trimask` (+ sidecar) and `out/derive.json`.
#[allow(clippy::too_many_arguments)]
pub fn derive_mask(
    gt: &Path,
    over_clip: &Path,
    subject: &Path,
    params: &MorphParams,
    gray_prob: f64,
    seed: u64,
    out: &Path,
    dry_run: bool,
) -> Result<DeriveMaskMeta> {
    params.validate()?;
    if !(0.0..=1.0).contains(&gray_prob) {
        return Err(Error::Param(format!(
            "gray_prob must be in [0, 1], got {gray_prob}"
        )));
    }
    let gt = io::read_clip(gt)?;
    let over_clip = io::read_clip(over_clip)?;
    let subject = io::read_binary_mask(subject)?;
    let derived = derive_effect_mask(&gt, &over_clip, &subject, params)?;
    let tri = trimask::gray_augment(&trimask::from_binary(&derived.mask), gray_prob, seed)?;
    let meta = DeriveMaskMeta {
        threshold: derived.threshold,
        threshold_mode: "global".into(),
        params: *params,
        effect_pixels: derived.mask.count_ones(),
        gray_prob,
        seed,
        unknown_value: trimask::UNKNOWN,
    };
    if !dry_run {
        io::write_binary_mask(&out.join("effect"), &derived.mask)?;
        io::write_trimask(&out.join("trimask"), &tri)?;
        fs::write(
            out.join(DERIVE_META_FILE),
            serde_json::to_string_pretty(&meta)? + "\n",
        )?;
    }
    Ok(meta)
}

fn read_text(path: &Path) -> Result<Option<String>> {
    if path.is_file() {
        Ok(Some(fs::read_to_string(path)?.trim().to_string()))
    } else {
        Ok(None)
    }
}

fn sample_dirs(layer_root: &Path) -> Result<Vec<PathBuf>> {
    require_dir(layer_root)?;
    let mut dirs: Vec<PathBuf> = fs::read_dir(layer_root)?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.is_dir())
        .collect();
    dirs.sort();
    Ok(dirs)
}

enum Planned {
    Paired(SampleKind),
    Unpaired,
}

fn plan_sample(dir: &Path) -> Result<(String, Planned, String, String)> {
    let id = dir
        .file_name()
        .and_then(|n| n.to_str())
        .ok_or_else(|| Error::Validation(format!("bad sample directory {}", dir.display())))?
        .to_string();
    require_dir(&dir.join(layout::GT))?;
    let caption = read_text(&dir.join(layout::CAPTION))?
        .filter(|c| !c.is_empty())
        .ok_or_else(|| Error::Validation(format!("{id}: missing or empty {}", layout::CAPTION)))?;
    let provenance = read_text(&dir.join(layout::PROVENANCE))?.unwrap_or_else(|| id.clone());
    let paired = dir.join(layout::FG).is_dir();
    let planned = if paired {
        for d in [layout::ALPHA, layout::BG, layout::SUBJECT] {
            require_dir(&dir.join(d))?;
        }
        let kind = match read_text(&dir.join(layout::KIND))?.as_deref() {
            None | Some("paired_real") => SampleKind::PairedReal,
            Some("paired_synthetic") => SampleKind::PairedSynthetic,
            Some(other) => {
                return Err(Error::Validation(format!("{id}: unknown kind {other:?}")));
            }
        };
        Planned::Paired(kind)
    } else {
        Planned::Unpaired
    };
    Ok((id, planned, caption, provenance))
}

/// Builds every sample folder under `layer_root` (sorted by name) into a dataset
/// rooted at the manifest's directory, then writes the manifest.
pub fn build_dataset(
    layer_root: &Path,
    manifest_out: &Path,
    opts: &BuildOptions,
    dry_run: bool,
) -> Result<DatasetStats> {
    opts.params.validate()?;
    let root = manifest_out
        .parent()
        .filter(|p| !p.as_os_str().is_empty())
        .unwrap_or(Path::new("."))
        .to_path_buf();
    let plans = sample_dirs(layer_root)?
        .iter()
        .map(|d| plan_sample(d).map(|p| (d.clone(), p)))
        .collect::<Result<Vec<_>>>()?;

    let samples = plans
        .par_iter()
        .map(
            |(dir, (id, planned, caption, provenance))| -> Result<DatasetSample> {
                let gt = io::read_clip(&dir.join(layout::GT))?;
                match planned {
                    Planned::Unpaired => {
                        let sample = DatasetSample {
                            id: id.clone(),
                            kind: SampleKind::Unpaired,
                            gt: format!("{id}/gt"),
                            over: None,
                            trimask: None,
                            caption: caption.clone(),
                            provenance: provenance.clone(),
                        };
                        sample.validate()?;
                        if dry_run {
                            Ok(sample)
                        } else {
                            build_unpaired_sample(&root, id, &gt, caption, provenance)
                        }
                    }
                    Planned::Paired(kind) => {
                        let fg = io::read_clip(&dir.join(layout::FG))?;
                        let alpha = io::read_alpha(&dir.join(layout::ALPHA))?;
                        let bg = io::read_clip(&dir.join(layout::BG))?;
                        let subject = io::read_binary_mask(&dir.join(layout::SUBJECT))?;
                        let layers = PairedLayers {
                            gt: &gt,
                            fg_star: &fg,
                            alpha: &alpha,
                            bg: &bg,
                            subject: &subject,
                        };
                        if dry_run {
                            let residual = crate::compose::recompose_check(&fg, &alpha, &bg, &gt)?;
                            if residual.mean_abs > opts.max_mean_residual {
                                return Err(Error::DataQuality {
                                    mean_abs: residual.mean_abs,
                                    tolerance: opts.max_mean_residual,
                                });
                            }
                            return Ok(DatasetSample {
                                id: id.clone(),
                                kind: *kind,
                                gt: format!("{id}/gt"),
                                over: Some(format!("{id}/over")),
                                trimask: Some(format!("{id}/trimask")),
                                caption: caption.clone(),
                                provenance: provenance.clone(),
                            });
                        }
                        let seeded = BuildOptions {
                            seed: opts.seed ^ stable_hash(id),
                            ..opts.clone()
                        };
                        build_paired_sample(&root, id, *kind, layers, caption, provenance, &seeded)
                            .map(|b| b.sample)
                            .map_err(|e| match e {
                                Error::DataQuality { .. } => {
                                    log::error!("{id}: rejected: {e}");
                                    e
                                }
                                e => e,
                            })
                    }
                }
            },
        )
        .collect::<Result<Vec<_>>>()?;

    let manifest = Manifest::new(samples);
    manifest.validate()?;
    if !dry_run {
        write_manifest(&manifest, manifest_out)?;
    }
    let stats = dataset_stats(&manifest, (!dry_run).then_some(root.as_path()))?;
    info!("dataset: {} samples", stats.total_samples);
    Ok(stats)
}

/// FNV-1a, used to give each sample its own augmentation stream.
fn stable_hash(s: &str) -> u64 {
    s.bytes().fold(0xcbf2_9ce4_8422_2325u64, |h, b| {
        (h ^ b as u64).wrapping_mul(0x0100_0000_01b3)
    })
}

#[derive(Debug, Deserialize)]
#[serde(untagged)]
enum SceneSpec {
    One(Box<OracleScene>),
    Many(Vec<OracleScene>),
}

pub fn read_scene_spec(path: &Path) -> Result<Vec<OracleScene>> {
    let text = fs::read_to_string(path).map_err(|e| match e.kind() {
        std::io::ErrorKind::NotFound => Error::MissingAsset(path.to_path_buf()),
        _ => Error::Io(e),
    })?;
    let spec: SceneSpec = serde_json::from_str(&text)
        .map_err(|e| Error::Validation(format!("{}: {e}", path.display())))?;
    Ok(match spec {
        SceneSpec::One(s) => vec![*s],
        SceneSpec::Many(v) => v,
    })
}

/// Renders each scene of the spec file into `out/oracle_NNN/` using the layer-root layout.
pub fn oracle(spec: &Path, out: &Path, dry_run: bool) -> Result<Vec<PathBuf>> {
    let scenes = read_scene_spec(spec)?;
    for s in &scenes {
        s.validate()?;
    }
    let mut written = Vec::new();
    for (i, scene) in scenes.iter().enumerate() {
        let dir = out.join(format!("oracle_{i:03}"));
        written.push(dir.clone());
        if dry_run {
            continue;
        }
        let b = generate(scene)?;
        io::write_clip(&dir.join(layout::GT), &b.gt)?;
        io::write_clip(&dir.join(layout::FG), &b.fg_star)?;
        io::write_alpha(&dir.join(layout::ALPHA), &b.alpha)?;
        io::write_clip(&dir.join(layout::BG), &b.bg)?;
        io::write_binary_mask(&dir.join(layout::SUBJECT), &b.subject_mask)?;
        io::write_clip(&dir.join(layout::OVER), &b.over)?;
        io::write_binary_mask(&dir.join(layout::EFFECT_TRUTH), &b.effect_mask_truth)?;
        fs::write(
            dir.join(layout::CAPTION),
            "a box moves and casts a shadow\n",
        )?;
        fs::write(dir.join(layout::KIND), "paired_synthetic\n")?;
        fs::write(
            dir.join(layout::PROVENANCE),
            format!("oracle seed {}\n", scene.seed),
        )?;
        fs::write(
            dir.join("scene.json"),
            serde_json::to_string_pretty(scene)? + "\n",
        )?;
    }
    Ok(written)
}

/// Scores `gen` against `gt`/`over` and writes one JSON report.
/// Without a provider command the in-process mock provider is used.
pub fn evaluate(
    gt: &Path,
    over_clip: &Path,
    gen: &Path,
    provider: Option<&str>,
    caption: Option<&str>,
    report_out: &Path,
    dry_run: bool,
) -> Result<MetricReport> {
    let ids = ClipIds {
        gt: Some(gt.display().to_string()),
        over: Some(over_clip.display().to_string()),
        generated: Some(gen.display().to_string()),
    };
    let gt = io::read_clip(gt)?;
    let over_clip = io::read_clip(over_clip)?;
    let gen = io::read_clip(gen)?;
    let mut provider: Box<dyn EmbeddingProvider> = match provider {
        Some(cmd) => Box::new(ProcessProvider::spawn(cmd)?),
        None => Box::new(MockProvider::default()),
    };
    let report = evaluate_pair(&gt, &over_clip, &gen, provider.as_mut(), caption, ids)?;
    if let Some(e) = report.errors.iter().find(|e| e.kind == "provider") {
        if report.clip_dir.available == 0 {
            return Err(Error::Provider(e.message.clone()));
        }
    }
    if !dry_run {
        if let Some(parent) = report_out.parent().filter(|p| !p.as_os_str().is_empty()) {
            fs::create_dir_all(parent)?;
        }
        fs::write(report_out, report.to_json()? + "\n")?;
    }
    Ok(report)
}

pub fn plan_windows(frames: usize, window: usize, stride: usize) -> Result<WindowPlan> {
    plan(frames, window, stride)
}
