//! Effect-mask derivation: luma of the pair difference, a global Otsu threshold,
//! then erosion, dilation and a majority (median) filter, minus the subject.

use log::warn;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::clip::{BinaryMaskVideo, Dims, GrayVideo, VideoClip};
use crate::compose::diff_delta;
use crate::error::{Error, Result};

pub const LUMA_WEIGHTS: [f64; 3] = [0.299, 0.587, 0.114];
pub const HISTOGRAM_BINS: usize = 256;
pub const MAX_MORPH_ITERS: u32 = 16;

/// BT.601 luma of one RGB triple.
#[inline]
pub fn luma(rgb: [f32; 3]) -> f32 {
    let y = LUMA_WEIGHTS[0] * rgb[0] as f64
        + LUMA_WEIGHTS[1] * rgb[1] as f64
        + LUMA_WEIGHTS[2] * rgb[2] as f64;
    (y as f32).clamp(0.0, 1.0)
}

pub fn to_grayscale(clip: &VideoClip) -> GrayVideo {
    let data = clip
        .as_slice()
        .par_chunks_exact(3)
        .map(|p| luma([p[0], p[1], p[2]]))
        .collect();
    GrayVideo::new(clip.dims(), data).expect("dims already validated")
}

/// 256-bin intensity histogram; bin `b` holds values in `[b/256, (b+1)/256)`, 1.0 lands in 255.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Histogram {
    pub counts: [u64; HISTOGRAM_BINS],
}

#[inline]
pub fn intensity_bin(v: f32) -> usize {
    ((v * HISTOGRAM_BINS as f32) as usize).min(HISTOGRAM_BINS - 1)
}

impl Histogram {
    pub fn from_counts(counts: [u64; HISTOGRAM_BINS]) -> Self {
        Histogram { counts }
    }

    /// Accumulates per frame in parallel; integer counts make the reduction order irrelevant.
    pub fn from_gray(gray: &GrayVideo) -> Self {
        let px = gray.dims().pixels_per_frame();
        let counts = gray
            .as_slice()
            .par_chunks(px)
            .map(|frame| {
                let mut h = [0u64; HISTOGRAM_BINS];
                for &v in frame {
                    h[intensity_bin(v)] += 1;
                }
                h
            })
            .reduce(
                || [0u64; HISTOGRAM_BINS],
                |mut a, b| {
                    for (x, y) in a.iter_mut().zip(b) {
                        *x += y;
                    }
                    a
                },
            );
        Histogram { counts }
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }
}

/// Otsu split of a histogram: returns `k` in `1..=255` such that bins `< k` form the
/// background class and bins `>= k` the foreground, maximizing between-class variance.
/// Ties resolve to the smallest `k`.
pub fn otsu_bin(hist: &Histogram) -> Result<usize> {
    if hist.counts.iter().filter(|&&c| c > 0).count() < 2 {
        return Err(Error::DegenerateHistogram);
    }
    let total = hist.total() as i128;
    let weighted: i128 = hist
        .counts
        .iter()
        .enumerate()
        .map(|(b, &c)| b as i128 * c as i128)
        .sum();

    let (mut n0, mut s0) = (0i128, 0i128);
    let mut best: Option<(usize, f64)> = None;
    for k in 1..HISTOGRAM_BINS {
        n0 += hist.counts[k - 1] as i128;
        s0 += (k as i128 - 1) * hist.counts[k - 1] as i128;
        let n1 = total - n0;
        if n0 == 0 || n1 == 0 {
            continue;
        }
        // N^2 * sigma_b^2 = (N*S0 - n0*S)^2 / (n0 * n1)
        let d = (total * s0 - n0 * weighted) as f64;
        let score = d * d / (n0 as f64 * n1 as f64);
        if best.is_none_or(|(_, s)| score > s) {
            best = Some((k, score));
        }
    }
    best.map(|(k, _)| k).ok_or(Error::DegenerateHistogram)
}

/// Largest float whose bin lies below `k`, so `v > threshold` iff `intensity_bin(v) >= k`.
pub fn threshold_for_bin(k: usize) -> f32 {
    debug_assert!((1..HISTOGRAM_BINS).contains(&k));
    let edge = k as f32 / HISTOGRAM_BINS as f32;
    f32::from_bits(edge.to_bits() - 1)
}

/// One global Otsu threshold over the whole video.
pub fn otsu_threshold(gray: &GrayVideo) -> Result<f32> {
    otsu_bin(&Histogram::from_gray(gray)).map(threshold_for_bin)
}

pub fn binarize(gray: &GrayVideo, threshold: f32) -> BinaryMaskVideo {
    let data = gray
        .as_slice()
        .iter()
        .map(|&v| (v > threshold) as u8)
        .collect();
    BinaryMaskVideo::from_raw(gray.dims(), data)
}

#[derive(Clone, Copy)]
enum MorphOp {
    Erode,
    Dilate,
}

/// One 3x3 square pass, done separably; `border` is the value assumed outside the frame.
fn morph_pass(src: &[u8], dst: &mut [u8], h: usize, w: usize, op: MorphOp, border: u8) {
    let combine = |a: u8, b: u8| match op {
        MorphOp::Erode => a & b,
        MorphOp::Dilate => a | b,
    };
    let mut rows = vec![0u8; h * w];
    for y in 0..h {
        let row = &src[y * w..(y + 1) * w];
        for x in 0..w {
            let left = if x > 0 { row[x - 1] } else { border };
            let right = if x + 1 < w { row[x + 1] } else { border };
            rows[y * w + x] = combine(combine(left, row[x]), right);
        }
    }
    for y in 0..h {
        for x in 0..w {
            let up = if y > 0 { rows[(y - 1) * w + x] } else { border };
            let down = if y + 1 < h {
                rows[(y + 1) * w + x]
            } else {
                border
            };
            dst[y * w + x] = combine(combine(up, rows[y * w + x]), down);
        }
    }
}

fn morph(mask: &BinaryMaskVideo, iters: u32, op: MorphOp, border: bool) -> BinaryMaskVideo {
    let Dims { height, width, .. } = mask.dims();
    let mut data = mask.as_slice().to_vec();
    if iters == 0 {
        return mask.clone();
    }
    data.par_chunks_mut(height * width).for_each(|frame| {
        let mut scratch = vec![0u8; frame.len()];
        for _ in 0..iters {
            morph_pass(frame, &mut scratch, height, width, op, border as u8);
            frame.copy_from_slice(&scratch);
        }
    });
    BinaryMaskVideo::from_raw(mask.dims(), data)
}

/// Binary erosion with a 3x3 square, per frame; pixels outside the frame count as 0.
pub fn erode(mask: &BinaryMaskVideo, iters: u32) -> BinaryMaskVideo {
    morph(mask, iters, MorphOp::Erode, false)
}

/// Binary dilation with a 3x3 square, per frame; pixels outside the frame count as 0.
pub fn dilate(mask: &BinaryMaskVideo, iters: u32) -> BinaryMaskVideo {
    morph(mask, iters, MorphOp::Dilate, false)
}

/// Erosion with an explicit outside-frame value.
pub fn erode_with_border(mask: &BinaryMaskVideo, iters: u32, border: bool) -> BinaryMaskVideo {
    morph(mask, iters, MorphOp::Erode, border)
}

/// Dilation with an explicit outside-frame value.
pub fn dilate_with_border(mask: &BinaryMaskVideo, iters: u32, border: bool) -> BinaryMaskVideo {
    morph(mask, iters, MorphOp::Dilate, border)
}

/// Majority filter over a `k x k` window with replicated borders (the binary median).
pub fn median_filter(mask: &BinaryMaskVideo, k: usize) -> Result<BinaryMaskVideo> {
    if k == 0 || k.is_multiple_of(2) {
        return Err(Error::Param(format!(
            "median kernel must be odd and >= 1, got {k}"
        )));
    }
    if k == 1 {
        return Ok(mask.clone());
    }
    let Dims { height, width, .. } = mask.dims();
    let r = k / 2;
    let (ph, pw) = (height + 2 * r, width + 2 * r);
    let majority = (k * k) as u32 / 2;
    let mut data = mask.as_slice().to_vec();
    data.par_chunks_mut(height * width).for_each(|frame| {
        // Summed-area table over the replicate-padded frame.
        let mut sat = vec![0u32; (ph + 1) * (pw + 1)];
        for py in 0..ph {
            let sy = py.saturating_sub(r).min(height - 1);
            let mut run = 0u32;
            for px in 0..pw {
                let sx = px.saturating_sub(r).min(width - 1);
                run += frame[sy * width + sx] as u32;
                sat[(py + 1) * (pw + 1) + px + 1] = sat[py * (pw + 1) + px + 1] + run;
            }
        }
        for y in 0..height {
            for x in 0..width {
                let (y0, x0, y1, x1) = (y, x, y + k, x + k);
                let ones = sat[y1 * (pw + 1) + x1] + sat[y0 * (pw + 1) + x0]
                    - sat[y0 * (pw + 1) + x1]
                    - sat[y1 * (pw + 1) + x0];
                frame[y * width + x] = (ones > majority) as u8;
            }
        }
    });
    Ok(BinaryMaskVideo::from_raw(mask.dims(), data))
}

/// Refinement settings for mask pruning. The structuring element is a fixed 3x3 square.
/// Defaults: no erosion or dilation, 3x3 majority filter.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct MorphParams {
    pub erode_iters: u32,
    pub dilate_iters: u32,
    pub median_kernel: usize,
}

impl Default for MorphParams {
    fn default() -> Self {
        MorphParams {
            erode_iters: 0,
            dilate_iters: 0,
            median_kernel: 3,
        }
    }
}

impl MorphParams {
    pub fn validate(&self) -> Result<()> {
        if self.erode_iters > MAX_MORPH_ITERS || self.dilate_iters > MAX_MORPH_ITERS {
            return Err(Error::Param(format!(
                "morphology iterations must be <= {MAX_MORPH_ITERS}, got erode={} dilate={}",
                self.erode_iters, self.dilate_iters
            )));
        }
        if self.median_kernel == 0 || self.median_kernel.is_multiple_of(2) {
            return Err(Error::Param(format!(
                "median kernel must be odd and >= 1, got {}",
                self.median_kernel
            )));
        }
        Ok(())
    }
}

/// Result of the effect-mask pipeline plus the metadata it decided on.
#[derive(Debug, Clone, PartialEq)]
pub struct DerivedEffectMask {
    pub mask: BinaryMaskVideo,
    /// Global Otsu threshold on luma; `None` when the difference histogram was degenerate.
    pub threshold: Option<f32>,
}

/// diff -> luma -> global Otsu -> binarize -> erode -> dilate -> median -> minus subject.
pub fn derive_effect_mask(
    gt: &VideoClip,
    over_clip: &VideoClip,
    subject: &BinaryMaskVideo,
    params: &MorphParams,
) -> Result<DerivedEffectMask> {
    params.validate()?;
    gt.dims().ensure_matches(&subject.dims())?;
    let gray = to_grayscale(&diff_delta(gt, over_clip)?);
    let threshold = match otsu_threshold(&gray) {
        Ok(t) => t,
        Err(Error::DegenerateHistogram) => {
            warn!("difference histogram is degenerate; emitting an empty effect mask");
            return Ok(DerivedEffectMask {
                mask: BinaryMaskVideo::zeros(gt.dims())?,
                threshold: None,
            });
        }
        Err(e) => return Err(e),
    };
    let mask = binarize(&gray, threshold);
    let mask = erode(&mask, params.erode_iters);
    let mask = dilate(&mask, params.dilate_iters);
    let mask = median_filter(&mask, params.median_kernel)?;
    Ok(DerivedEffectMask {
        mask: mask.subtract(subject)?,
        threshold: Some(threshold),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::clip::Fps;

    fn single_frame(h: usize, w: usize, ones: &[(usize, usize)]) -> BinaryMaskVideo {
        BinaryMaskVideo::from_fn(Dims::new(1, h, w), |_, y, x| ones.contains(&(y, x))).unwrap()
    }

    #[test]
    fn luma_of_primaries() {
        assert_eq!(luma([1.0, 1.0, 1.0]), 1.0);
        assert_eq!(luma([0.0, 1.0, 0.0]), 0.587);
    }

    #[test]
    fn two_spike_histogram_splits_between_spikes() {
        let mut counts = [0u64; 256];
        counts[50] = 1000;
        counts[200] = 1000;
        let k = otsu_bin(&Histogram::from_counts(counts)).unwrap();
        assert!(k > 50 && k <= 200, "k = {k}");
        let t = threshold_for_bin(k);
        assert!((50.5 / 256.0..200.0 / 256.0).contains(&t));
    }

    #[test]
    fn constant_video_is_degenerate() {
        let gray = GrayVideo::new(Dims::new(2, 3, 3), vec![0.4; 18]).unwrap();
        assert!(matches!(
            otsu_threshold(&gray),
            Err(Error::DegenerateHistogram)
        ));
    }

    #[test]
    fn threshold_matches_bin_membership() {
        for k in 1..256 {
            let t = threshold_for_bin(k);
            let edge = k as f32 / 256.0;
            assert!(edge > t);
            assert_eq!(intensity_bin(edge), k);
            assert_eq!(intensity_bin(t), k - 1);
        }
    }

    #[test]
    fn binarize_extremes() {
        let gray = GrayVideo::new(Dims::new(1, 2, 2), vec![0.1, 0.5, 0.9, 1.0]).unwrap();
        assert_eq!(binarize(&gray, 0.0).count_ones(), 4);
        assert_eq!(binarize(&gray, 1.0).count_ones(), 0);
    }

    #[test]
    fn erode_all_ones_clears_border() {
        let m = BinaryMaskVideo::ones(Dims::new(1, 5, 6)).unwrap();
        let e = erode(&m, 1);
        for y in 0..5 {
            for x in 0..6 {
                let interior = y > 0 && y < 4 && x > 0 && x < 5;
                assert_eq!(e.get(0, y, x), interior, "({y},{x})");
            }
        }
    }

    #[test]
    fn dilate_center_pixel_gives_block() {
        let d = dilate(&single_frame(5, 5, &[(2, 2)]), 1);
        assert_eq!(d.count_ones(), 9);
        for y in 1..4 {
            for x in 1..4 {
                assert!(d.get(0, y, x));
            }
        }
    }

    #[test]
    fn median_removes_isolated_pixel_and_k1_is_identity() {
        let m = single_frame(7, 7, &[(3, 3)]);
        assert_eq!(median_filter(&m, 1).unwrap(), m);
        assert_eq!(median_filter(&m, 3).unwrap().count_ones(), 0);
        assert!(matches!(median_filter(&m, 4), Err(Error::Param(_))));
    }

    #[test]
    fn morph_params_caps() {
        let p = MorphParams {
            erode_iters: 17,
            ..MorphParams::default()
        };
        assert!(p.validate().is_err());
        let p = MorphParams {
            median_kernel: 2,
            ..MorphParams::default()
        };
        assert!(p.validate().is_err());
    }

    #[test]
    fn identical_pair_yields_empty_mask() {
        let d = Dims::new(3, 8, 8);
        let clip = VideoClip::from_fn(d, |t, y, x| [(t + y + x) as f32 / 20.0; 3])
            .unwrap()
            .with_fps(Fps::default());
        let subject = BinaryMaskVideo::zeros(d).unwrap();
        let out = derive_effect_mask(&clip, &clip, &subject, &MorphParams::default()).unwrap();
        assert_eq!(out.mask.count_ones(), 0);
        assert!(out.threshold.is_none());
    }
}
