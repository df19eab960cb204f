//! Independent scalar reference implementations used as test oracles.
#![allow(dead_code)]

use augcomp::clip::{BinaryMaskVideo, Dims, FrameRef, VideoClip};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub mod pipeline;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_clip(rng: &mut ChaCha8Rng, dims: Dims) -> VideoClip {
    VideoClip::from_fn(dims, |_, _, _| [rng.random(), rng.random(), rng.random()]).unwrap()
}

pub fn random_mask(rng: &mut ChaCha8Rng, dims: Dims, density: f64) -> BinaryMaskVideo {
    BinaryMaskVideo::from_fn(dims, |_, _, _| rng.random_bool(density)).unwrap()
}

/// Exhaustive Otsu: for every split `k` (bins `< k` vs `>= k`) compute
/// `w0 * w1 * (mu0 - mu1)^2` from scratch and keep the first maximum.
pub fn otsu_exhaustive(counts: &[u64; 256]) -> Option<usize> {
    let total: u64 = counts.iter().sum();
    let mut best: Option<(usize, f64)> = None;
    for k in 1..256 {
        let n0: u64 = counts[..k].iter().sum();
        let n1: u64 = counts[k..].iter().sum();
        if n0 == 0 || n1 == 0 {
            continue;
        }
        let s0: f64 = (0..k).map(|b| b as f64 * counts[b] as f64).sum();
        let s1: f64 = (k..256).map(|b| b as f64 * counts[b] as f64).sum();
        let (w0, w1) = (n0 as f64 / total as f64, n1 as f64 / total as f64);
        let (m0, m1) = (s0 / n0 as f64, s1 / n1 as f64);
        let var = w0 * w1 * (m0 - m1) * (m0 - m1);
        if best.is_none_or(|(_, v)| var > v) {
            best = Some((k, var));
        }
    }
    best.map(|(k, _)| k)
}

/// Iterated 3x3 square morphology == min/max over the `(2n+1)^2` neighbourhood,
/// with `border` assumed outside the frame.
pub fn morph_oracle(
    mask: &BinaryMaskVideo,
    iters: usize,
    dilate: bool,
    border: bool,
) -> BinaryMaskVideo {
    let d = mask.dims();
    let r = iters as i64;
    BinaryMaskVideo::from_fn(d, |t, y, x| {
        let mut acc = !dilate;
        for dy in -r..=r {
            for dx in -r..=r {
                let (yy, xx) = (y as i64 + dy, x as i64 + dx);
                let v = if yy < 0 || xx < 0 || yy >= d.height as i64 || xx >= d.width as i64 {
                    border
                } else {
                    mask.get(t, yy as usize, xx as usize)
                };
                acc = if dilate { acc || v } else { acc && v };
            }
        }
        acc
    })
    .unwrap()
}

/// Majority vote over the `k x k` window with clamped (replicated) coordinates.
pub fn median_oracle(mask: &BinaryMaskVideo, k: usize) -> BinaryMaskVideo {
    let d = mask.dims();
    let r = (k / 2) as i64;
    BinaryMaskVideo::from_fn(d, |t, y, x| {
        let mut ones = 0;
        for dy in -r..=r {
            for dx in -r..=r {
                let yy = (y as i64 + dy).clamp(0, d.height as i64 - 1) as usize;
                let xx = (x as i64 + dx).clamp(0, d.width as i64 - 1) as usize;
                ones += mask.get(t, yy, xx) as usize;
            }
        }
        ones * 2 > k * k
    })
    .unwrap()
}

fn luma(p: [f32; 3]) -> f64 {
    0.299 * p[0] as f64 + 0.587 * p[1] as f64 + 0.114 * p[2] as f64
}

/// SSIM by direct two-pass summation over every 11x11 window, Gaussian sigma 1.5.
pub fn ssim_direct(a: FrameRef<'_>, b: FrameRef<'_>) -> f64 {
    let (h, w) = (a.height, a.width);
    let g: Vec<f64> = (0..11)
        .map(|i| (-((i as f64 - 5.0).powi(2)) / 4.5).exp())
        .collect();
    let gs: f64 = g.iter().sum();
    let c1 = 0.01f64.powi(2);
    let c2 = 0.03f64.powi(2);
    let mut total = 0.0;
    let mut count = 0usize;
    for y0 in 0..=h - 11 {
        for x0 in 0..=w - 11 {
            let weight = |u: usize, v: usize| g[u] * g[v] / (gs * gs);
            let (mut ma, mut mb) = (0.0, 0.0);
            for u in 0..11 {
                for v in 0..11 {
                    ma += weight(u, v) * luma(a.pixel(y0 + u, x0 + v));
                    mb += weight(u, v) * luma(b.pixel(y0 + u, x0 + v));
                }
            }
            let (mut va, mut vb, mut cov) = (0.0, 0.0, 0.0);
            for u in 0..11 {
                for v in 0..11 {
                    let da = luma(a.pixel(y0 + u, x0 + v)) - ma;
                    let db = luma(b.pixel(y0 + u, x0 + v)) - mb;
                    va += weight(u, v) * da * da;
                    vb += weight(u, v) * db * db;
                    cov += weight(u, v) * da * db;
                }
            }
            total += ((2.0 * ma * mb + c1) * (2.0 * cov + c2))
                / ((ma * ma + mb * mb + c1) * (va + vb + c2));
            count += 1;
        }
    }
    total / count as f64
}

pub fn psnr_direct(a: FrameRef<'_>, b: FrameRef<'_>) -> f64 {
    let mut sum = 0.0;
    for (x, y) in a.data.iter().zip(b.data) {
        sum += (*x as f64 - *y as f64).powi(2);
    }
    let mse = sum / a.data.len() as f64;
    if mse == 0.0 {
        100.0
    } else {
        (10.0 * (1.0 / mse).log10()).min(100.0)
    }
}

/// `100 * cos` of the two change directions, from plain loops.
pub fn clip_dir_scalar(gt: &[f64], over: &[f64], gen: &[f64]) -> f64 {
    let mut dot = 0.0;
    let mut n1 = 0.0;
    let mut n2 = 0.0;
    for i in 0..gt.len() {
        let a = gt[i] - over[i];
        let b = gen[i] - over[i];
        dot += a * b;
        n1 += a * a;
        n2 += b * b;
    }
    100.0 * dot / (n1.sqrt() * n2.sqrt())
}

pub fn unit(v: &[f64]) -> Vec<f64> {
    let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    v.iter().map(|x| x / n).collect()
}

pub fn random_unit(rng: &mut ChaCha8Rng, dim: usize) -> Vec<f64> {
    unit(
        &(0..dim)
            .map(|_| rng.random_range(-1.0..1.0))
            .collect::<Vec<f64>>(),
    )
}

/// Mean IoU and minimum IoU.
pub fn summarize(values: &[f64]) -> (f64, f64) {
    let mean = values.iter().sum::<f64>() / values.len() as f64;
    let min = values.iter().cloned().fold(f64::INFINITY, f64::min);
    (mean, min)
}
