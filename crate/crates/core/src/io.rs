//! Frame-sequence storage: one directory per video, `frame_000001.png` onward.
//!
//! RGB clips are 8-bit RGB PNGs plus a `clip.json` carrying the frame rate.
//! Masks and mattes are 8-bit grayscale PNGs. Tri-masks add a `frame_state.txt`
//! sidecar with one `annotated` / `unknown` line per frame.

use std::fs;
use std::path::{Path, PathBuf};

use image::{GrayImage, ImageBuffer, Luma, Rgb, RgbImage};
use serde::{Deserialize, Serialize};

use crate::clip::{dequantize, quantize, AlphaMatte, BinaryMaskVideo, Dims, Fps, VideoClip};
use crate::error::{Error, Result};
use crate::trimask::{FrameState, TriMask};

pub const CLIP_META: &str = "clip.json";
pub const FRAME_STATE_FILE: &str = "frame_state.txt";

pub fn frame_file_name(t: usize) -> String {
    format!("frame_{:06}.png", t + 1)
}

#[derive(Debug, Serialize, Deserialize)]
struct ClipMeta {
    fps: Fps,
}

/// Frame files in `dir`, in frame order.
pub fn list_frames(dir: &Path) -> Result<Vec<PathBuf>> {
    if !dir.is_dir() {
        return Err(Error::MissingAsset(dir.to_path_buf()));
    }
    let mut frames: Vec<PathBuf> = fs::read_dir(dir)?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| {
            p.file_name()
                .and_then(|n| n.to_str())
                .is_some_and(|n| n.starts_with("frame_") && n.ends_with(".png"))
        })
        .collect();
    frames.sort();
    if frames.is_empty() {
        return Err(Error::Validation(format!(
            "no frame files in {}",
            dir.display()
        )));
    }
    Ok(frames)
}

fn check_frame_dims(path: &Path, expected: (u32, u32), found: (u32, u32)) -> Result<()> {
    if expected != found {
        return Err(Error::Validation(format!(
            "{}: frame is {}x{}, expected {}x{}",
            path.display(),
            found.0,
            found.1,
            expected.0,
            expected.1
        )));
    }
    Ok(())
}

pub fn write_clip(dir: &Path, clip: &VideoClip) -> Result<()> {
    fs::create_dir_all(dir)?;
    let (h, w) = (clip.height() as u32, clip.width() as u32);
    let bytes = clip.to_u8();
    let n = clip.frame_len();
    for t in 0..clip.frames() {
        let img: RgbImage = ImageBuffer::from_raw(w, h, bytes[t * n..(t + 1) * n].to_vec())
            .expect("buffer sized from clip dims");
        img.save(dir.join(frame_file_name(t)))?;
    }
    fs::write(
        dir.join(CLIP_META),
        serde_json::to_string(&ClipMeta { fps: clip.fps })? + "\n",
    )?;
    Ok(())
}

pub fn read_clip(dir: &Path) -> Result<VideoClip> {
    let frames = list_frames(dir)?;
    let mut bytes = Vec::new();
    let mut size = None;
    for path in &frames {
        let img: ImageBuffer<Rgb<u8>, Vec<u8>> = image::open(path)?.to_rgb8();
        let found = (img.width(), img.height());
        check_frame_dims(path, *size.get_or_insert(found), found)?;
        bytes.extend_from_slice(img.as_raw());
    }
    let (w, h) = size.expect("at least one frame");
    let meta = dir.join(CLIP_META);
    let fps = if meta.is_file() {
        serde_json::from_str::<ClipMeta>(&fs::read_to_string(meta)?)?.fps
    } else {
        Fps::default()
    };
    VideoClip::from_u8(Dims::new(frames.len(), h as usize, w as usize), &bytes, fps)
}

fn write_gray_frames(dir: &Path, dims: Dims, values: &[u8]) -> Result<()> {
    fs::create_dir_all(dir)?;
    let n = dims.pixels_per_frame();
    for t in 0..dims.frames {
        let img: GrayImage = ImageBuffer::from_raw(
            dims.width as u32,
            dims.height as u32,
            values[t * n..(t + 1) * n].to_vec(),
        )
        .expect("buffer sized from dims");
        img.save(dir.join(frame_file_name(t)))?;
    }
    Ok(())
}

fn read_gray_frames(dir: &Path) -> Result<(Dims, Vec<u8>)> {
    let frames = list_frames(dir)?;
    let mut bytes = Vec::new();
    let mut size = None;
    for path in &frames {
        let img: ImageBuffer<Luma<u8>, Vec<u8>> = image::open(path)?.to_luma8();
        let found = (img.width(), img.height());
        check_frame_dims(path, *size.get_or_insert(found), found)?;
        bytes.extend_from_slice(img.as_raw());
    }
    let (w, h) = size.expect("at least one frame");
    Ok((Dims::new(frames.len(), h as usize, w as usize), bytes))
}

/// Writes a binary mask as 0/255 gray frames.
pub fn write_binary_mask(dir: &Path, mask: &BinaryMaskVideo) -> Result<()> {
    let values: Vec<u8> = mask.as_slice().iter().map(|&v| v * 255).collect();
    write_gray_frames(dir, mask.dims(), &values)
}

/// Reads gray frames as a binary mask; values `>= 128` are set.
pub fn read_binary_mask(dir: &Path) -> Result<BinaryMaskVideo> {
    let (dims, bytes) = read_gray_frames(dir)?;
    BinaryMaskVideo::new(dims, bytes.into_iter().map(|v| (v >= 128) as u8).collect())
}

pub fn write_alpha(dir: &Path, alpha: &AlphaMatte) -> Result<()> {
    let values: Vec<u8> = alpha.as_slice().iter().map(|&v| quantize(v)).collect();
    write_gray_frames(dir, alpha.dims(), &values)
}

pub fn read_alpha(dir: &Path) -> Result<AlphaMatte> {
    let (dims, bytes) = read_gray_frames(dir)?;
    AlphaMatte::new(dims, bytes.into_iter().map(dequantize).collect())
}

pub fn write_trimask(dir: &Path, mask: &TriMask) -> Result<()> {
    write_gray_frames(dir, mask.dims(), mask.as_slice())?;
    let mut sidecar = String::new();
    for s in mask.states() {
        sidecar.push_str(s.as_str());
        sidecar.push('\n');
    }
    fs::write(dir.join(FRAME_STATE_FILE), sidecar)?;
    Ok(())
}

pub fn read_trimask(dir: &Path) -> Result<TriMask> {
    let (dims, bytes) = read_gray_frames(dir)?;
    let sidecar_path = dir.join(FRAME_STATE_FILE);
    if !sidecar_path.is_file() {
        return Err(Error::MissingAsset(sidecar_path));
    }
    let states = fs::read_to_string(&sidecar_path)?
        .lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| {
            FrameState::parse(l.trim()).ok_or_else(|| {
                Error::Validation(format!(
                    "{} line {}: unknown frame state {l:?}",
                    sidecar_path.display(),
                    i + 1
                ))
            })
        })
        .collect::<Result<Vec<_>>>()?;
    TriMask::from_parts(dims, bytes, states)
}
