//! Procedural paired scenes with an exactly known layer decomposition.
//!
//! A solid rectangle moves linearly over a static background and casts a hard
//! rectangular shadow: the footprint translated by a fixed offset, darkening the
//! background by a factor `kappa`. The shadow lives in the foreground layer as a
//! black layer with alpha `1 - kappa`, so the ground truth there is `kappa * bg`.

use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::clip::{AlphaMatte, BinaryMaskVideo, Dims, VideoClip};
use crate::compose::{compose_subject_over, over};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SubjectSpec {
    pub width: usize,
    pub height: usize,
    pub color: [f32; 3],
    /// Top-left corner `(x, y)` at frame 0.
    pub start: [f64; 2],
    /// Pixels per frame `(vx, vy)`.
    pub velocity: [f64; 2],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ShadowSpec {
    /// Footprint translation `(dx, dy)` in pixels.
    pub offset: [i64; 2],
    /// Background attenuation inside the shadow, in `(0, 1)`.
    pub kappa: f32,
    /// Gaussian falloff width outside the footprint. Hard-edged when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub soft_sigma: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Background {
    /// Gray checkerboard; each cell's level is jittered by up to `jitter` using the scene seed.
    Checkerboard {
        cell: usize,
        low: f32,
        high: f32,
        #[serde(default)]
        jitter: f32,
    },
    /// Horizontal RGB gradient from `left` to `right`.
    Gradient { left: [f32; 3], right: [f32; 3] },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OracleScene {
    pub frames: usize,
    pub height: usize,
    pub width: usize,
    pub subject: SubjectSpec,
    pub shadow: ShadowSpec,
    pub background: Background,
    #[serde(default)]
    pub seed: u64,
}

/// Every layer of a generated scene.
#[derive(Debug, Clone, PartialEq)]
pub struct OracleBundle {
    pub gt: VideoClip,
    pub over: VideoClip,
    pub fg_star: VideoClip,
    pub alpha: AlphaMatte,
    pub bg: VideoClip,
    pub subject_mask: BinaryMaskVideo,
    pub effect_mask_truth: BinaryMaskVideo,
}

impl OracleScene {
    /// A randomized but valid hard-shadow scene, fully determined by `seed`.
    pub fn seeded(seed: u64, frames: usize, height: usize, width: usize) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let sw = rng.random_range(10..=16).min(width / 3);
        let sh = rng.random_range(10..=16).min(height / 3);
        let margin = 8usize;
        let span = |size: usize, extent: usize| (margin as f64, (extent - size - margin) as f64);
        let (x_lo, x_hi) = span(sw, width);
        let (y_lo, y_hi) = span(sh, height);
        let x0 = rng.random_range(x_lo..=x_hi);
        let y0 = rng.random_range(y_lo..=y_hi);
        let x1 = rng.random_range(x_lo..=x_hi);
        let y1 = rng.random_range(y_lo..=y_hi);
        let steps = (frames.max(2) - 1) as f64;
        let sign = |b: bool| if b { 1 } else { -1 };
        let dx = sign(rng.random()) * rng.random_range(4..=7);
        let dy = sign(rng.random()) * rng.random_range(4..=7);
        OracleScene {
            frames,
            height,
            width,
            subject: SubjectSpec {
                width: sw,
                height: sh,
                color: [
                    rng.random_range(0.05..0.95),
                    rng.random_range(0.05..0.95),
                    rng.random_range(0.05..0.95),
                ],
                start: [x0, y0],
                velocity: [(x1 - x0) / steps, (y1 - y0) / steps],
            },
            shadow: ShadowSpec {
                offset: [dx, dy],
                kappa: rng.random_range(0.35..0.6),
                soft_sigma: None,
            },
            background: Background::Checkerboard {
                cell: 8,
                low: 0.55,
                high: 0.85,
                jitter: 0.05,
            },
            seed,
        }
    }

    pub fn dims(&self) -> Dims {
        Dims::new(self.frames, self.height, self.width)
    }

    /// Top-left `(x, y)` of the subject at frame `t`.
    pub fn subject_origin(&self, t: usize) -> (i64, i64) {
        let x = self.subject.start[0] + self.subject.velocity[0] * t as f64;
        let y = self.subject.start[1] + self.subject.velocity[1] * t as f64;
        (x.round() as i64, y.round() as i64)
    }

    pub fn validate(&self) -> Result<()> {
        if self.frames == 0 || self.height == 0 || self.width == 0 {
            return Err(Error::Validation(
                "scene dimensions must be positive".into(),
            ));
        }
        let k = self.shadow.kappa;
        if !(k > 0.0 && k < 1.0) {
            return Err(Error::Validation(format!(
                "kappa must be in (0, 1), got {k}"
            )));
        }
        if self.subject.width == 0 || self.subject.height == 0 {
            return Err(Error::Validation("subject size must be positive".into()));
        }
        for t in 0..self.frames {
            let (x, y) = self.subject_origin(t);
            if x < 0
                || y < 0
                || x as usize + self.subject.width > self.width
                || y as usize + self.subject.height > self.height
            {
                return Err(Error::Validation(format!(
                    "subject leaves the frame at t={t} (origin {x},{y})"
                )));
            }
        }
        match &self.background {
            Background::Checkerboard {
                cell,
                low,
                high,
                jitter,
            } => {
                if *cell == 0 {
                    return Err(Error::Validation(
                        "checkerboard cell must be positive".into(),
                    ));
                }
                if low - jitter <= 0.0 || high + jitter > 1.0 {
                    return Err(Error::Validation(
                        "checkerboard levels must stay inside (0, 1] after jitter".into(),
                    ));
                }
            }
            Background::Gradient { left, right } => {
                if left.iter().chain(right).any(|&v| v <= 0.0 || v > 1.0) {
                    return Err(Error::Validation(
                        "gradient endpoints must lie in (0, 1]".into(),
                    ));
                }
            }
        }
        Ok(())
    }

    fn background_clip(&self) -> Result<VideoClip> {
        let dims = self.dims();
        match &self.background {
            Background::Checkerboard {
                cell,
                low,
                high,
                jitter,
            } => {
                let cells_x = self.width.div_ceil(*cell);
                let cells_y = self.height.div_ceil(*cell);
                let mut rng = ChaCha8Rng::seed_from_u64(self.seed ^ 0x6267_5f6a_6974_7465);
                let offsets: Vec<f32> = (0..cells_x * cells_y)
                    .map(|_| {
                        if *jitter > 0.0 {
                            rng.random_range(-*jitter..=*jitter)
                        } else {
                            0.0
                        }
                    })
                    .collect();
                VideoClip::from_fn(dims, |_, y, x| {
                    let (cy, cx) = (y / cell, x / cell);
                    let base = if (cy + cx) % 2 == 0 { *low } else { *high };
                    [base + offsets[cy * cells_x + cx]; 3]
                })
            }
            Background::Gradient { left, right } => {
                let denom = (self.width.max(2) - 1) as f32;
                VideoClip::from_fn(dims, |_, _, x| {
                    let s = x as f32 / denom;
                    [0, 1, 2].map(|c| left[c] + (right[c] - left[c]) * s)
                })
            }
        }
    }

    fn inside_subject(&self, t: usize, y: usize, x: usize) -> bool {
        let (ox, oy) = self.subject_origin(t);
        let (x, y) = (x as i64, y as i64);
        x >= ox
            && x < ox + self.subject.width as i64
            && y >= oy
            && y < oy + self.subject.height as i64
    }

    /// Distance from `(x, y)` to the shadow footprint rectangle at frame `t` (0 inside).
    fn shadow_distance(&self, t: usize, y: usize, x: usize) -> f64 {
        let (ox, oy) = self.subject_origin(t);
        let (sx, sy) = (ox + self.shadow.offset[0], oy + self.shadow.offset[1]);
        let gap = |p: i64, lo: i64, len: usize| {
            let hi = lo + len as i64 - 1;
            if p < lo {
                (lo - p) as f64
            } else if p > hi {
                (p - hi) as f64
            } else {
                0.0
            }
        };
        let gx = gap(x as i64, sx, self.subject.width);
        let gy = gap(y as i64, sy, self.subject.height);
        (gx * gx + gy * gy).sqrt()
    }
}

/// Renders every layer of `scene`. `gt` is built with [`over`], the no-effect clip
/// with [`compose_subject_over`].
pub fn generate(scene: &OracleScene) -> Result<OracleBundle> {
    scene.validate()?;
    let dims = scene.dims();
    let bg = scene.background_clip()?;
    let shadow_alpha = 1.0 - scene.shadow.kappa;

    let subject_mask = BinaryMaskVideo::from_fn(dims, |t, y, x| scene.inside_subject(t, y, x))?;
    let footprint =
        BinaryMaskVideo::from_fn(dims, |t, y, x| scene.shadow_distance(t, y, x) == 0.0)?;
    let effect_mask_truth = footprint.subtract(&subject_mask)?;

    let color = scene.subject.color;
    let fg_star = VideoClip::from_fn(dims, |t, y, x| {
        if scene.inside_subject(t, y, x) {
            color
        } else {
            [0.0; 3]
        }
    })?;
    let alpha = AlphaMatte::from_fn(dims, |t, y, x| {
        if scene.inside_subject(t, y, x) {
            return 1.0;
        }
        let d = scene.shadow_distance(t, y, x);
        match scene.shadow.soft_sigma {
            _ if d == 0.0 => shadow_alpha,
            Some(sigma) if sigma > 0.0 => {
                shadow_alpha * (-d * d / (2.0 * sigma * sigma)).exp() as f32
            }
            _ => 0.0,
        }
    })?;

    let gt = over(&fg_star, &alpha, &bg)?;
    let over_clip = compose_subject_over(&fg_star, &subject_mask, &bg)?;
    Ok(OracleBundle {
        gt,
        over: over_clip,
        fg_star,
        alpha,
        bg,
        subject_mask,
        effect_mask_truth,
    })
}

/// Adds Gaussian noise (clamped) to `gt`, then sets exactly
/// `floor(salt_pepper_frac * T * H * W)` distinct pixels to black or white.
pub fn perturb(
    bundle: &OracleBundle,
    noise_sigma: f64,
    salt_pepper_frac: f64,
    seed: u64,
) -> Result<OracleBundle> {
    if noise_sigma < 0.0 || !(0.0..=1.0).contains(&salt_pepper_frac) {
        return Err(Error::Param(format!(
            "noise_sigma must be >= 0 and salt_pepper_frac in [0, 1], got {noise_sigma}, {salt_pepper_frac}"
        )));
    }
    let mut out = bundle.clone();
    if noise_sigma == 0.0 && salt_pepper_frac == 0.0 {
        return Ok(out);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let dims = bundle.gt.dims();
    let mut data = bundle.gt.as_slice().to_vec();
    if noise_sigma > 0.0 {
        let normal = Normal::new(0.0, noise_sigma).map_err(|e| Error::Param(e.to_string()))?;
        for v in data.iter_mut() {
            *v = (*v as f64 + normal.sample(&mut rng)).clamp(0.0, 1.0) as f32;
        }
    }
    let flips = (salt_pepper_frac * dims.pixel_count() as f64).floor() as usize;
    for p in sample(&mut rng, dims.pixel_count(), flips) {
        let level = if rng.random::<bool>() { 1.0 } else { 0.0 };
        data[p * 3..p * 3 + 3].fill(level);
    }
    out.gt = VideoClip::new(dims, data, bundle.gt.fps)?;
    Ok(out)
}
