//! Temporal multidiffusion: overlapping fixed-length windows over a long clip,
//! blended back with per-frame weights that sum to one.

use serde::{Deserialize, Serialize};

use crate::clip::VideoClip;
use crate::error::{Error, Result};
use crate::trimask::TriMask;

/// Context length of the base video model.
pub const DEFAULT_WINDOW: usize = 85;
pub const DEFAULT_STRIDE: usize = 64;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Ramp {
    #[default]
    Linear,
    Cosine,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WindowPlan {
    pub total_frames: usize,
    /// Half-open `[start, end)` frame ranges.
    pub windows: Vec<(usize, usize)>,
    /// `weights[i][j]` is the blend weight of window `i` for frame `windows[i].0 + j`.
    pub weights: Vec<Vec<f64>>,
}

impl WindowPlan {
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(self)?)
    }

    /// Sum of weights covering each frame.
    pub fn coverage(&self) -> Vec<f64> {
        let mut sums = vec![0.0; self.total_frames];
        for (&(s, _), w) in self.windows.iter().zip(&self.weights) {
            for (j, v) in w.iter().enumerate() {
                sums[s + j] += v;
            }
        }
        sums
    }
}

pub fn plan(total_frames: usize, window: usize, stride: usize) -> Result<WindowPlan> {
    plan_with_ramp(total_frames, window, stride, Ramp::Linear)
}

/// Windows start at multiples of `stride`; the last one is right-aligned to the end
/// so every window has full length. Overlaps get ramps, then each frame's weights
/// are normalized to sum to one.
pub fn plan_with_ramp(
    total_frames: usize,
    window: usize,
    stride: usize,
    ramp: Ramp,
) -> Result<WindowPlan> {
    if total_frames == 0 || window == 0 || stride == 0 {
        return Err(Error::Param(format!(
            "frames, window and stride must be positive (got {total_frames}, {window}, {stride})"
        )));
    }
    if stride > window {
        return Err(Error::Param(format!(
            "stride {stride} exceeds window {window}"
        )));
    }
    if total_frames <= window {
        return Ok(WindowPlan {
            total_frames,
            windows: vec![(0, total_frames)],
            weights: vec![vec![1.0; total_frames]],
        });
    }

    let mut windows = Vec::new();
    let mut start = 0;
    while start + window < total_frames {
        windows.push((start, start + window));
        start += stride;
    }
    let last = total_frames - window;
    if windows.last().is_none_or(|&(s, _)| s != last) {
        windows.push((last, total_frames));
    }

    let shape = |r: f64| match ramp {
        Ramp::Linear => r,
        Ramp::Cosine => (r * std::f64::consts::FRAC_PI_2).sin().powi(2),
    };
    let mut raw: Vec<Vec<f64>> = Vec::with_capacity(windows.len());
    for (i, &(s, e)) in windows.iter().enumerate() {
        let left = if i > 0 {
            windows[i - 1].1.saturating_sub(s)
        } else {
            0
        };
        let right = windows
            .get(i + 1)
            .map_or(0, |&(ns, _)| e.saturating_sub(ns));
        raw.push(
            (s..e)
                .map(|f| {
                    let up = (f - s + 1) as f64 / (left + 1) as f64;
                    let down = (e - f) as f64 / (right + 1) as f64;
                    shape(up.min(down).min(1.0))
                })
                .collect(),
        );
    }

    let mut sums = vec![0.0; total_frames];
    for (&(s, _), w) in windows.iter().zip(&raw) {
        for (j, v) in w.iter().enumerate() {
            sums[s + j] += v;
        }
    }
    let weights = windows
        .iter()
        .zip(raw)
        .map(|(&(s, _), w)| w.iter().enumerate().map(|(j, v)| v / sums[s + j]).collect())
        .collect();
    Ok(WindowPlan {
        total_frames,
        windows,
        weights,
    })
}

/// Weighted per-frame sum of the window outputs.
pub fn blend(plan: &WindowPlan, outputs: &[VideoClip]) -> Result<VideoClip> {
    if outputs.len() != plan.windows.len() {
        return Err(Error::Param(format!(
            "{} window outputs for {} windows",
            outputs.len(),
            plan.windows.len()
        )));
    }
    let first = &outputs[0];
    let (h, w) = (first.height(), first.width());
    let frame_len = h * w * 3;
    for (i, (out, &(s, e))) in outputs.iter().zip(&plan.windows).enumerate() {
        if out.frames() != e - s || out.height() != h || out.width() != w {
            return Err(Error::Window {
                window: i,
                message: format!(
                    "output is {}x{}x{}, expected {}x{h}x{w}",
                    out.frames(),
                    out.height(),
                    out.width(),
                    e - s
                ),
            });
        }
    }
    let mut acc = vec![0.0f64; plan.total_frames * frame_len];
    for ((out, &(s, _)), weights) in outputs.iter().zip(&plan.windows).zip(&plan.weights) {
        for (j, &wt) in weights.iter().enumerate() {
            let dst = &mut acc[(s + j) * frame_len..(s + j + 1) * frame_len];
            for (d, &v) in dst.iter_mut().zip(out.frame(j).data) {
                *d += wt * v as f64;
            }
        }
    }
    let data = acc.into_iter().map(|v| v as f32).collect();
    VideoClip::new(
        crate::clip::Dims::new(plan.total_frames, h, w),
        data,
        first.fps,
    )
}

/// Slices the clip and tri-mask per window, runs `processor(window_index, clip, trimask)`
/// on each slice and blends the results.
pub fn run_windowed<F>(
    clip: &VideoClip,
    trimask: &TriMask,
    plan: &WindowPlan,
    mut processor: F,
) -> Result<VideoClip>
where
    F: FnMut(usize, &VideoClip, &TriMask) -> Result<VideoClip>,
{
    clip.dims().ensure_matches(&trimask.dims())?;
    if plan.total_frames != clip.frames() {
        return Err(Error::Param(format!(
            "plan covers {} frames, clip has {}",
            plan.total_frames,
            clip.frames()
        )));
    }
    let mut outputs = Vec::with_capacity(plan.windows.len());
    for (i, &(s, e)) in plan.windows.iter().enumerate() {
        let c = clip.slice_frames(s, e)?;
        let m = trimask.slice_frames(s, e)?;
        let out = processor(i, &c, &m)?;
        if out.dims() != c.dims() {
            return Err(Error::Window {
                window: i,
                message: format!(
                    "processor returned {:?}, expected {:?}",
                    out.dims(),
                    c.dims()
                ),
            });
        }
        outputs.push(out);
    }
    blend(plan, &outputs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::clip::Dims;

    #[test]
    fn boundary_and_short_clips_get_one_window() {
        for n in [85, 10, 1] {
            let p = plan(n, 85, 64).unwrap();
            assert_eq!(p.windows, vec![(0, n)]);
            assert!(p.weights[0].iter().all(|&w| w == 1.0));
        }
    }

    #[test]
    fn parameter_errors() {
        assert!(plan(100, 85, 90).is_err());
        assert!(plan(0, 85, 64).is_err());
        assert!(plan(100, 0, 0).is_err());
    }

    #[test]
    fn three_way_overlap_still_sums_to_one() {
        let p = plan(150, 85, 64).unwrap();
        assert_eq!(p.windows, vec![(0, 85), (64, 149), (65, 150)]);
        for s in p.coverage() {
            assert!((s - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn cosine_ramp_is_a_partition_of_unity() {
        let p = plan_with_ramp(200, 85, 64, Ramp::Cosine).unwrap();
        for s in p.coverage() {
            assert!((s - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn processor_shape_error_names_window() {
        let d = Dims::new(149, 2, 2);
        let clip = VideoClip::zeros(d).unwrap();
        let tri = TriMask::unknown(d);
        let p = plan(149, 85, 64).unwrap();
        let err = run_windowed(&clip, &tri, &p, |i, c, _| {
            if i == 1 {
                c.slice_frames(0, 10)
            } else {
                Ok(c.clone())
            }
        })
        .unwrap_err();
        assert!(matches!(err, Error::Window { window: 1, .. }));
    }

    #[test]
    fn blend_count_mismatch() {
        let p = plan(149, 85, 64).unwrap();
        let one = VideoClip::zeros(Dims::new(85, 1, 1)).unwrap();
        assert!(blend(&p, &[one]).is_err());
    }
}
