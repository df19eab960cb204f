//! Evaluation: directional and plain embedding similarity through a pluggable
//! provider, plus per-frame SSIM and PSNR, averaged over frames.

mod embedding;
mod provider;
mod quality;

use std::collections::BTreeMap;

use log::warn;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use embedding::{
    clip_dir, clip_dir_raw, clip_dir_with_eps, cosine_sim, EmbeddingVector, DEFAULT_DIRECTION_EPS,
};
pub use provider::{
    decode_response, encode_embedding, mock_image_embedding, mock_text_embedding, serve_mock,
    EmbeddingProvider, MockProvider, ProcessProvider, MOCK_DIM,
};
pub use quality::{
    frame_luma, gaussian_taps, psnr, ssim, PSNR_CAP_DB, SSIM_K1, SSIM_K2, SSIM_SIGMA, SSIM_WINDOW,
};

use crate::clip::VideoClip;
use crate::error::{Axis, Error, Result};

/// Per-frame values of one metric (`None` where the frame could not be scored) and
/// their mean over the available frames.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricSeries {
    pub per_frame: Vec<Option<f64>>,
    pub mean: Option<f64>,
    pub available: usize,
    pub missing: usize,
}

impl MetricSeries {
    pub fn from_values(per_frame: Vec<Option<f64>>) -> Self {
        let available: Vec<f64> = per_frame.iter().flatten().copied().collect();
        let mean =
            (!available.is_empty()).then(|| available.iter().sum::<f64>() / available.len() as f64);
        MetricSeries {
            missing: per_frame.len() - available.len(),
            available: available.len(),
            per_frame,
            mean,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrameError {
    pub frame: usize,
    pub metric: String,
    pub kind: String,
    pub message: String,
}

/// Labels identifying the evaluated clips.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ClipIds {
    pub gt: Option<String>,
    pub over: Option<String>,
    pub generated: Option<String>,
}

/// One evaluation, serialized as a single JSON document.
///
/// `external` reserves slots (`lpips`, `fvd`, `vmaf`, `vbench`) for scores computed by
/// other tools; they are `null` until merged in.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricReport {
    pub provider: String,
    pub clip_ids: ClipIds,
    /// Frame counts of gt, over and generated clips before trimming.
    pub source_frames: [usize; 3],
    pub frames_evaluated: usize,
    pub ssim: MetricSeries,
    pub psnr: MetricSeries,
    pub clip_dir: MetricSeries,
    pub clip_img: MetricSeries,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub clip_text: Option<MetricSeries>,
    pub errors: Vec<FrameError>,
    pub external: BTreeMap<String, Option<f64>>,
}

impl MetricReport {
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

pub const EXTERNAL_METRIC_SLOTS: [&str; 4] = ["fvd", "lpips", "vbench", "vmaf"];

fn frame_error(frame: usize, metric: &str, err: &Error) -> FrameError {
    FrameError {
        frame,
        metric: metric.to_string(),
        kind: err.kind().to_string(),
        message: err.to_string(),
    }
}

/// Scores `gen` against `gt`, with `over_clip` as the no-effect reference for the
/// directional metric. Clips are trimmed to the shortest frame count.
pub fn evaluate_pair(
    gt: &VideoClip,
    over_clip: &VideoClip,
    gen: &VideoClip,
    provider: &mut dyn EmbeddingProvider,
    caption: Option<&str>,
    clip_ids: ClipIds,
) -> Result<MetricReport> {
    let source_frames = [gt.frames(), over_clip.frames(), gen.frames()];
    let frames = *source_frames.iter().min().expect("three clips");
    if source_frames.iter().any(|&n| n != frames) {
        warn!("frame counts differ {source_frames:?}; trimming all clips to {frames} frames");
    }
    for clip in [over_clip, gen] {
        if clip.height() != gt.height() {
            return Err(Error::Shape {
                axis: Axis::Height,
                expected: gt.height(),
                found: clip.height(),
            });
        }
        if clip.width() != gt.width() {
            return Err(Error::Shape {
                axis: Axis::Width,
                expected: gt.width(),
                found: clip.width(),
            });
        }
    }

    let mut errors = Vec::new();

    let quality: Vec<(Result<f64>, Result<f64>)> = (0..frames)
        .into_par_iter()
        .map(|t| {
            (
                ssim(gen.frame(t), gt.frame(t)),
                psnr(gen.frame(t), gt.frame(t)),
            )
        })
        .collect();
    let mut ssim_vals = Vec::with_capacity(frames);
    let mut psnr_vals = Vec::with_capacity(frames);
    for (t, (s, p)) in quality.into_iter().enumerate() {
        match s {
            Ok(v) => ssim_vals.push(Some(v)),
            Err(e) => {
                errors.push(frame_error(t, "ssim", &e));
                ssim_vals.push(None);
            }
        }
        match p {
            Ok(v) => psnr_vals.push(Some(v)),
            Err(e) => {
                errors.push(frame_error(t, "psnr", &e));
                psnr_vals.push(None);
            }
        }
    }

    let text = match caption {
        Some(c) => match provider.embed_text(c) {
            Ok(v) => v,
            Err(e) => {
                errors.push(FrameError {
                    frame: 0,
                    metric: "clip_text".into(),
                    kind: e.kind().into(),
                    message: e.to_string(),
                });
                None
            }
        },
        None => None,
    };

    let mut dir_vals = Vec::with_capacity(frames);
    let mut img_vals = Vec::with_capacity(frames);
    let mut text_vals = Vec::with_capacity(frames);
    for t in 0..frames {
        let embedded = provider.embed_image(gt.frame(t)).and_then(|e_gt| {
            let e_over = provider.embed_image(over_clip.frame(t))?;
            let e_gen = provider.embed_image(gen.frame(t))?;
            Ok((e_gt, e_over, e_gen))
        });
        let (e_gt, e_over, e_gen) = match embedded {
            Ok(v) => v,
            Err(e) => {
                errors.push(frame_error(t, "embedding", &e));
                dir_vals.push(None);
                img_vals.push(None);
                text_vals.push(None);
                continue;
            }
        };
        dir_vals.push(match clip_dir(&e_gt, &e_over, &e_gen) {
            Ok(v) => Some(v),
            Err(e) => {
                errors.push(frame_error(t, "clip_dir", &e));
                None
            }
        });
        img_vals.push(cosine_sim(&e_gen, &e_gt).ok());
        text_vals.push(text.as_ref().and_then(|txt| cosine_sim(&e_gen, txt).ok()));
    }

    Ok(MetricReport {
        provider: provider.id(),
        clip_ids,
        source_frames,
        frames_evaluated: frames,
        ssim: MetricSeries::from_values(ssim_vals),
        psnr: MetricSeries::from_values(psnr_vals),
        clip_dir: MetricSeries::from_values(dir_vals),
        clip_img: MetricSeries::from_values(img_vals),
        clip_text: text.is_some().then(|| MetricSeries::from_values(text_vals)),
        errors,
        external: EXTERNAL_METRIC_SLOTS
            .iter()
            .map(|k| (k.to_string(), None))
            .collect(),
    })
}
