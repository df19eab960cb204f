//! Training-sample construction, the NDJSON manifest and bundle assembly.
//!
//! A manifest file starts with one header object (`version`, `default_resolution`)
//! followed by one JSON object per sample. Asset paths are relative to the
//! manifest's directory; each sample owns a directory named after its id.

use std::collections::{BTreeMap, HashSet};
use std::fs;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use log::info;
use serde::{Deserialize, Serialize};

use crate::clip::{AlphaMatte, BinaryMaskVideo, VideoClip};
use crate::compose::{compose_subject_over, recompose_check, ResidualStats};
use crate::error::{Error, Result};
use crate::io;
use crate::mask::{derive_effect_mask, DerivedEffectMask, MorphParams};
use crate::trimask::{self, TriMask};

pub const MANIFEST_VERSION: u32 = 1;
/// Training resolution `(H, W)`.
pub const DEFAULT_RESOLUTION: (usize, usize) = (384, 672);
pub const DEFAULT_MAX_MEAN_RESIDUAL: f64 = 0.02;

pub const GT_DIR: &str = "gt";
pub const OVER_DIR: &str = "over";
pub const EFFECT_DIR: &str = "effect";
pub const TRIMASK_DIR: &str = "trimask";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SampleKind {
    PairedReal,
    PairedSynthetic,
    Unpaired,
}

impl SampleKind {
    pub fn is_paired(&self) -> bool {
        !matches!(self, SampleKind::Unpaired)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DatasetSample {
    pub id: String,
    pub kind: SampleKind,
    pub gt: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub over: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub trimask: Option<String>,
    pub caption: String,
    pub provenance: String,
}

impl DatasetSample {
    pub fn validate(&self) -> Result<()> {
        if self.id.is_empty() {
            return Err(Error::Validation("sample id must be non-empty".into()));
        }
        if self.caption.trim().is_empty() {
            return Err(Error::Validation(format!(
                "sample {}: caption is empty",
                self.id
            )));
        }
        let has_conditioning = (self.over.is_some(), self.trimask.is_some());
        match (self.kind.is_paired(), has_conditioning) {
            (true, (true, true)) | (false, (false, false)) => Ok(()),
            (true, _) => Err(Error::Validation(format!(
                "sample {}: paired samples need both over and trimask",
                self.id
            ))),
            (false, _) => Err(Error::Validation(format!(
                "sample {}: unpaired samples carry no over/trimask",
                self.id
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ManifestHeader {
    version: u32,
    default_resolution: (usize, usize),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Manifest {
    pub version: u32,
    pub default_resolution: (usize, usize),
    pub samples: Vec<DatasetSample>,
}

impl Default for Manifest {
    fn default() -> Self {
        Manifest {
            version: MANIFEST_VERSION,
            default_resolution: DEFAULT_RESOLUTION,
            samples: Vec::new(),
        }
    }
}

impl Manifest {
    pub fn new(samples: Vec<DatasetSample>) -> Self {
        Manifest {
            samples,
            ..Manifest::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.version != MANIFEST_VERSION {
            return Err(Error::Validation(format!(
                "unsupported manifest version {}",
                self.version
            )));
        }
        if self.default_resolution.0 == 0 || self.default_resolution.1 == 0 {
            return Err(Error::Validation(
                "default resolution must be positive".into(),
            ));
        }
        let mut seen = HashSet::new();
        for s in &self.samples {
            s.validate()?;
            if !seen.insert(s.id.as_str()) {
                return Err(Error::Validation(format!("duplicate sample id {}", s.id)));
            }
        }
        Ok(())
    }

    pub fn get(&self, id: &str) -> Option<&DatasetSample> {
        self.samples.iter().find(|s| s.id == id)
    }
}

pub fn write_manifest(manifest: &Manifest, path: &Path) -> Result<()> {
    manifest.validate()?;
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent)?;
    }
    let mut out = BufWriter::new(fs::File::create(path)?);
    let header = ManifestHeader {
        version: manifest.version,
        default_resolution: manifest.default_resolution,
    };
    serde_json::to_writer(&mut out, &header)?;
    out.write_all(b"\n")?;
    for sample in &manifest.samples {
        serde_json::to_writer(&mut out, sample)?;
        out.write_all(b"\n")?;
    }
    out.flush()?;
    Ok(())
}

pub fn read_manifest(path: &Path) -> Result<Manifest> {
    let file = fs::File::open(path).map_err(|e| match e.kind() {
        std::io::ErrorKind::NotFound => Error::MissingAsset(path.to_path_buf()),
        _ => Error::Io(e),
    })?;
    let mut header = None;
    let mut samples = Vec::new();
    let mut seen = HashSet::new();
    for (i, line) in BufReader::new(file).lines().enumerate() {
        let line_no = i + 1;
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let bad = |message: String| Error::Manifest {
            line: line_no,
            message,
        };
        if header.is_none() {
            let h: ManifestHeader =
                serde_json::from_str(&line).map_err(|e| bad(format!("malformed header: {e}")))?;
            if h.version != MANIFEST_VERSION {
                return Err(bad(format!(
                    "version mismatch: expected {MANIFEST_VERSION}, found {}",
                    h.version
                )));
            }
            if h.default_resolution.0 == 0 || h.default_resolution.1 == 0 {
                return Err(bad("default resolution must be positive".into()));
            }
            header = Some(h);
            continue;
        }
        let sample: DatasetSample =
            serde_json::from_str(&line).map_err(|e| bad(format!("malformed record: {e}")))?;
        sample.validate().map_err(|e| bad(e.to_string()))?;
        if !seen.insert(sample.id.clone()) {
            return Err(bad(format!("duplicate id {}", sample.id)));
        }
        samples.push(sample);
    }
    let header = header.ok_or(Error::Manifest {
        line: 1,
        message: "missing header".into(),
    })?;
    Ok(Manifest {
        version: header.version,
        default_resolution: header.default_resolution,
        samples,
    })
}

/// Layer decomposition of one source clip.
#[derive(Debug, Clone, Copy)]
pub struct PairedLayers<'a> {
    pub gt: &'a VideoClip,
    pub fg_star: &'a VideoClip,
    pub alpha: &'a AlphaMatte,
    pub bg: &'a VideoClip,
    pub subject: &'a BinaryMaskVideo,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BuildOptions {
    pub params: MorphParams,
    /// Quality gate on the recomposition residual (mean abs).
    pub max_mean_residual: f64,
    /// Probability of graying out each stored tri-mask frame; 0 stores the mask as derived.
    pub gray_prob: f64,
    pub seed: u64,
}

impl Default for BuildOptions {
    fn default() -> Self {
        BuildOptions {
            params: MorphParams::default(),
            max_mean_residual: DEFAULT_MAX_MEAN_RESIDUAL,
            gray_prob: 0.0,
            seed: 0,
        }
    }
}

/// A registered paired sample together with the in-memory assets that were written.
#[derive(Debug, Clone)]
pub struct BuiltSample {
    pub sample: DatasetSample,
    pub over: VideoClip,
    pub effect: DerivedEffectMask,
    pub trimask: TriMask,
    pub residual: ResidualStats,
}

fn rel(id: &str, dir: &str) -> String {
    format!("{id}/{dir}")
}

/// Validates the decomposition, composes the no-effect clip, derives the effect mask
/// and writes `gt`, `over`, `effect` and `trimask` under `root/<id>/`.
pub fn build_paired_sample(
    root: &Path,
    id: &str,
    kind: SampleKind,
    layers: PairedLayers<'_>,
    caption: &str,
    provenance: &str,
    opts: &BuildOptions,
) -> Result<BuiltSample> {
    if !kind.is_paired() {
        return Err(Error::Param(
            "build_paired_sample needs a paired kind".into(),
        ));
    }
    let residual = recompose_check(layers.fg_star, layers.alpha, layers.bg, layers.gt)?;
    if residual.mean_abs > opts.max_mean_residual {
        return Err(Error::DataQuality {
            mean_abs: residual.mean_abs,
            tolerance: opts.max_mean_residual,
        });
    }
    let over = compose_subject_over(layers.fg_star, layers.subject, layers.bg)?;
    let effect = derive_effect_mask(layers.gt, &over, layers.subject, &opts.params)?;
    if effect.mask.intersection_count(layers.subject)? != 0 {
        return Err(Error::Validation(format!(
            "{id}: effect mask overlaps the subject"
        )));
    }
    let mut tri = trimask::from_binary(&effect.mask);
    if opts.gray_prob > 0.0 {
        tri = trimask::gray_augment(&tri, opts.gray_prob, opts.seed)?;
    }
    let sample = DatasetSample {
        id: id.to_string(),
        kind,
        gt: rel(id, GT_DIR),
        over: Some(rel(id, OVER_DIR)),
        trimask: Some(rel(id, TRIMASK_DIR)),
        caption: caption.to_string(),
        provenance: provenance.to_string(),
    };
    sample.validate()?;
    let dir = root.join(id);
    io::write_clip(&dir.join(GT_DIR), layers.gt)?;
    io::write_clip(&dir.join(OVER_DIR), &over)?;
    io::write_binary_mask(&dir.join(EFFECT_DIR), &effect.mask)?;
    io::write_trimask(&dir.join(TRIMASK_DIR), &tri)?;
    info!(
        "built paired sample {id}: residual {:.5}, effect pixels {}",
        residual.mean_abs,
        effect.mask.count_ones()
    );
    Ok(BuiltSample {
        sample,
        over,
        effect,
        trimask: tri,
        residual,
    })
}

/// Registers a caption-only sample and writes its `gt` frames under `root/<id>/`.
pub fn build_unpaired_sample(
    root: &Path,
    id: &str,
    gt: &VideoClip,
    caption: &str,
    provenance: &str,
) -> Result<DatasetSample> {
    let sample = DatasetSample {
        id: id.to_string(),
        kind: SampleKind::Unpaired,
        gt: rel(id, GT_DIR),
        over: None,
        trimask: None,
        caption: caption.to_string(),
        provenance: provenance.to_string(),
    };
    sample.validate()?;
    io::write_clip(&root.join(id).join(GT_DIR), gt)?;
    Ok(sample)
}

/// Model inputs for one sample. Unpaired samples carry an all-zero `over` clip and
/// an all-unknown tri-mask standing in for the zeroed conditioning.
#[derive(Debug, Clone, PartialEq)]
pub struct ConditioningBundle {
    pub gt: VideoClip,
    pub over: VideoClip,
    pub trimask: TriMask,
    pub caption: String,
    pub conditioning_present: bool,
}

fn resolve(root: &Path, rel: &str) -> Result<PathBuf> {
    let p = root.join(rel);
    if p.exists() {
        Ok(p)
    } else {
        Err(Error::MissingAsset(p))
    }
}

pub fn assemble(sample: &DatasetSample, root: &Path) -> Result<ConditioningBundle> {
    sample.validate()?;
    let gt = io::read_clip(&resolve(root, &sample.gt)?)?;
    let (over, trimask, present) = match (&sample.over, &sample.trimask) {
        (Some(o), Some(t)) => {
            let over = io::read_clip(&resolve(root, o)?)?;
            let tri = io::read_trimask(&resolve(root, t)?)?;
            gt.dims().ensure_matches(&over.dims())?;
            gt.dims().ensure_matches(&tri.dims())?;
            trimask::validate(&tri)
                .map_err(|v| Error::Validation(format!("sample {} trimask: {v}", sample.id)))?;
            (over, tri, true)
        }
        _ => (
            VideoClip::zeros(gt.dims())?.with_fps(gt.fps),
            TriMask::unknown(gt.dims()),
            false,
        ),
    };
    Ok(ConditioningBundle {
        gt,
        over,
        trimask,
        caption: sample.caption.clone(),
        conditioning_present: present,
    })
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct DatasetStats {
    pub counts: BTreeMap<SampleKind, usize>,
    pub total_samples: usize,
    /// Frames across all `gt` clips; only populated when assets were probed.
    pub total_frames: usize,
    /// `"HxW"` -> number of samples at that resolution; only populated when assets were probed.
    pub resolutions: BTreeMap<String, usize>,
}

impl DatasetStats {
    pub fn count(&self, kind: SampleKind) -> usize {
        self.counts.get(&kind).copied().unwrap_or(0)
    }
}

/// Per-kind counts; with `root`, also probes each `gt` directory for frame count and size.
pub fn dataset_stats(manifest: &Manifest, root: Option<&Path>) -> Result<DatasetStats> {
    let mut stats = DatasetStats::default();
    for s in &manifest.samples {
        *stats.counts.entry(s.kind).or_default() += 1;
        stats.total_samples += 1;
        if let Some(root) = root {
            let frames = io::list_frames(&root.join(&s.gt))?;
            let (w, h) = image::image_dimensions(&frames[0])?;
            stats.total_frames += frames.len();
            *stats.resolutions.entry(format!("{h}x{w}")).or_default() += 1;
        }
    }
    Ok(stats)
}
