//! Compositing algebra on straight (non-premultiplied) alpha.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::clip::{AlphaMatte, BinaryMaskVideo, VideoClip};
use crate::error::Result;

#[inline]
fn blend(alpha: f32, fg: f32, bg: f32) -> f32 {
    if alpha == 1.0 {
        fg
    } else if alpha == 0.0 {
        bg
    } else {
        (alpha * fg + (1.0 - alpha) * bg).clamp(0.0, 1.0)
    }
}

/// `alpha * fg + (1 - alpha) * bg` per pixel and channel.
pub fn over(fg: &VideoClip, alpha: &AlphaMatte, bg: &VideoClip) -> Result<VideoClip> {
    fg.dims().ensure_matches(&alpha.dims())?;
    fg.dims().ensure_matches(&bg.dims())?;
    let frame_len = fg.frame_len();
    let px = fg.dims().pixels_per_frame();
    let mut out = vec![0.0f32; fg.as_slice().len()];
    out.par_chunks_mut(frame_len)
        .zip(fg.as_slice().par_chunks(frame_len))
        .zip(bg.as_slice().par_chunks(frame_len))
        .zip(alpha.as_slice().par_chunks(px))
        .for_each(|(((dst, f), b), a)| {
            for (i, &av) in a.iter().enumerate() {
                for c in 0..3 {
                    let k = i * 3 + c;
                    dst[k] = blend(av, f[k], b[k]);
                }
            }
        });
    VideoClip::new(fg.dims(), out, fg.fps)
}

/// Re-composites the masked subject over the clean background:
/// `M * fg_star + (1 - M) * bg` with a binary `M`, i.e. a per-pixel selection.
pub fn compose_subject_over(
    fg_star: &VideoClip,
    subject: &BinaryMaskVideo,
    bg: &VideoClip,
) -> Result<VideoClip> {
    fg_star.dims().ensure_matches(&subject.dims())?;
    fg_star.dims().ensure_matches(&bg.dims())?;
    let out = fg_star
        .as_slice()
        .chunks_exact(3)
        .zip(bg.as_slice().chunks_exact(3))
        .zip(subject.as_slice())
        .flat_map(|((f, b), &m)| {
            if m == 1 {
                [f[0], f[1], f[2]]
            } else {
                [b[0], b[1], b[2]]
            }
        })
        .collect();
    VideoClip::new(fg_star.dims(), out, fg_star.fps)
}

/// Per-pixel, per-channel absolute difference `|a - b|`.
pub fn diff_delta(a: &VideoClip, b: &VideoClip) -> Result<VideoClip> {
    a.dims().ensure_matches(&b.dims())?;
    let out = a
        .as_slice()
        .par_iter()
        .zip(b.as_slice().par_iter())
        .map(|(&x, &y)| (x - y).abs())
        .collect();
    VideoClip::new(a.dims(), out, a.fps)
}

/// How well a layer decomposition reconstructs its source clip.
///
/// The per-pixel residual is the channel mean of `|over(fg, alpha, bg) - gt|`;
/// `mean_abs` averages it over all `T * H * W` pixels and `max_abs` is its maximum.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ResidualStats {
    pub mean_abs: f64,
    pub max_abs: f64,
}

pub fn recompose_check(
    fg_star: &VideoClip,
    alpha: &AlphaMatte,
    bg: &VideoClip,
    gt: &VideoClip,
) -> Result<ResidualStats> {
    fg_star.dims().ensure_matches(&gt.dims())?;
    let recomposed = over(fg_star, alpha, bg)?;
    let (mut sum, mut max) = (0.0f64, 0.0f64);
    for (r, g) in recomposed
        .as_slice()
        .chunks_exact(3)
        .zip(gt.as_slice().chunks_exact(3))
    {
        let e = (0..3)
            .map(|c| (r[c] as f64 - g[c] as f64).abs())
            .sum::<f64>()
            / 3.0;
        sum += e;
        max = max.max(e);
    }
    Ok(ResidualStats {
        mean_abs: sum / gt.dims().pixel_count() as f64,
        max_abs: max,
    })
}

/// A single straight-alpha RGBA sample.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Rgba {
    pub rgb: [f32; 3],
    pub alpha: f32,
}

impl Rgba {
    pub fn new(rgb: [f32; 3], alpha: f32) -> Self {
        Rgba { rgb, alpha }
    }

    /// Porter-Duff `self over below` for straight alpha.
    pub fn over(self, below: Rgba) -> Rgba {
        let a_top = self.alpha;
        let a_below = below.alpha * (1.0 - a_top);
        let alpha = a_top + a_below;
        if alpha <= 0.0 {
            return Rgba::new([0.0; 3], 0.0);
        }
        let mut rgb = [0.0; 3];
        for (c, out) in rgb.iter_mut().enumerate() {
            *out = (self.rgb[c] * a_top + below.rgb[c] * a_below) / alpha;
        }
        Rgba::new(rgb, alpha)
    }
}
