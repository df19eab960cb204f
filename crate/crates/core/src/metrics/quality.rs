//! Full-reference frame metrics: single-scale SSIM on BT.601 luma and RGB PSNR.

use crate::clip::FrameRef;
use crate::error::{Axis, Error, Result};
use crate::mask::LUMA_WEIGHTS;

pub const SSIM_WINDOW: usize = 11;
pub const SSIM_SIGMA: f64 = 1.5;
pub const SSIM_K1: f64 = 0.01;
pub const SSIM_K2: f64 = 0.03;
/// Dynamic range of the pixel values.
pub const SSIM_RANGE: f64 = 1.0;
/// Reported PSNR for identical frames.
pub const PSNR_CAP_DB: f64 = 100.0;

fn ensure_same_size(a: &FrameRef<'_>, b: &FrameRef<'_>) -> Result<()> {
    if a.height != b.height {
        return Err(Error::shape(Axis::Height, a.height, b.height));
    }
    if a.width != b.width {
        return Err(Error::shape(Axis::Width, a.width, b.width));
    }
    Ok(())
}

/// Normalized 1-D Gaussian taps; the 2-D window is their outer product.
pub fn gaussian_taps() -> [f64; SSIM_WINDOW] {
    let mut taps = [0.0; SSIM_WINDOW];
    let c = (SSIM_WINDOW / 2) as f64;
    for (i, t) in taps.iter_mut().enumerate() {
        let d = i as f64 - c;
        *t = (-d * d / (2.0 * SSIM_SIGMA * SSIM_SIGMA)).exp();
    }
    let sum: f64 = taps.iter().sum();
    taps.map(|t| t / sum)
}

pub fn frame_luma(frame: &FrameRef<'_>) -> Vec<f64> {
    frame
        .data
        .chunks_exact(3)
        .map(|p| {
            LUMA_WEIGHTS[0] * p[0] as f64
                + LUMA_WEIGHTS[1] * p[1] as f64
                + LUMA_WEIGHTS[2] * p[2] as f64
        })
        .collect()
}

/// Valid-region separable Gaussian filter of an `h x w` plane.
fn filter_valid(plane: &[f64], h: usize, w: usize, taps: &[f64; SSIM_WINDOW]) -> Vec<f64> {
    let (oh, ow) = (h - SSIM_WINDOW + 1, w - SSIM_WINDOW + 1);
    let mut rows = vec![0.0; h * ow];
    for y in 0..h {
        let src = &plane[y * w..(y + 1) * w];
        for x in 0..ow {
            rows[y * ow + x] = taps
                .iter()
                .zip(&src[x..x + SSIM_WINDOW])
                .map(|(t, v)| t * v)
                .sum();
        }
    }
    let mut out = vec![0.0; oh * ow];
    for y in 0..oh {
        for x in 0..ow {
            out[y * ow + x] = taps
                .iter()
                .enumerate()
                .map(|(i, t)| t * rows[(y + i) * ow + x])
                .sum();
        }
    }
    out
}

/// Mean SSIM over all valid 11x11 window positions.
pub fn ssim(a: FrameRef<'_>, b: FrameRef<'_>) -> Result<f64> {
    ensure_same_size(&a, &b)?;
    let (h, w) = (a.height, a.width);
    if h < SSIM_WINDOW || w < SSIM_WINDOW {
        return Err(Error::FrameTooSmall {
            height: h,
            width: w,
            window: SSIM_WINDOW,
        });
    }
    let taps = gaussian_taps();
    let la = frame_luma(&a);
    let lb = frame_luma(&b);
    let sq = |v: &[f64]| v.iter().map(|x| x * x).collect::<Vec<_>>();
    let ab: Vec<f64> = la.iter().zip(&lb).map(|(x, y)| x * y).collect();

    let mu_a = filter_valid(&la, h, w, &taps);
    let mu_b = filter_valid(&lb, h, w, &taps);
    let e_aa = filter_valid(&sq(&la), h, w, &taps);
    let e_bb = filter_valid(&sq(&lb), h, w, &taps);
    let e_ab = filter_valid(&ab, h, w, &taps);

    let c1 = (SSIM_K1 * SSIM_RANGE).powi(2);
    let c2 = (SSIM_K2 * SSIM_RANGE).powi(2);
    let total: f64 = (0..mu_a.len())
        .map(|i| {
            let (ma, mb) = (mu_a[i], mu_b[i]);
            let var_a = e_aa[i] - ma * ma;
            let var_b = e_bb[i] - mb * mb;
            let cov = e_ab[i] - ma * mb;
            ((2.0 * ma * mb + c1) * (2.0 * cov + c2))
                / ((ma * ma + mb * mb + c1) * (var_a + var_b + c2))
        })
        .sum();
    Ok(total / mu_a.len() as f64)
}

/// `10 log10(1 / MSE)` over all RGB samples, capped at [`PSNR_CAP_DB`].
pub fn psnr(a: FrameRef<'_>, b: FrameRef<'_>) -> Result<f64> {
    ensure_same_size(&a, &b)?;
    let mse = a
        .data
        .iter()
        .zip(b.data)
        .map(|(&x, &y)| {
            let d = x as f64 - y as f64;
            d * d
        })
        .sum::<f64>()
        / a.data.len() as f64;
    if mse == 0.0 {
        return Ok(PSNR_CAP_DB);
    }
    Ok((10.0 * (1.0 / mse).log10()).min(PSNR_CAP_DB))
}
