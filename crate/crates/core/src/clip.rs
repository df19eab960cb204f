//! Pixel carriers: RGB video clips, alpha mattes, binary and grayscale mask videos.
//!
//! All float data is stored frame-major, row-major, channel-interleaved (`t, y, x, c`).
//! Values live in `[0, 1]`; out-of-range input is clamped at construction.

use log::warn;
use serde::{Deserialize, Serialize};

use crate::error::{Axis, Error, Result};

/// Frame count and spatial size shared by every video-shaped array.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Dims {
    pub frames: usize,
    pub height: usize,
    pub width: usize,
}

impl Dims {
    pub fn new(frames: usize, height: usize, width: usize) -> Self {
        Dims {
            frames,
            height,
            width,
        }
    }

    pub fn pixels_per_frame(&self) -> usize {
        self.height * self.width
    }

    pub fn pixel_count(&self) -> usize {
        self.frames * self.height * self.width
    }

    /// Checks `other` against `self`, naming the first axis that differs.
    pub fn ensure_matches(&self, other: &Dims) -> Result<()> {
        if self.frames != other.frames {
            return Err(Error::shape(Axis::Frames, self.frames, other.frames));
        }
        if self.height != other.height {
            return Err(Error::shape(Axis::Height, self.height, other.height));
        }
        if self.width != other.width {
            return Err(Error::shape(Axis::Width, self.width, other.width));
        }
        Ok(())
    }

    fn validate(&self) -> Result<()> {
        if self.frames == 0 || self.height == 0 || self.width == 0 {
            return Err(Error::Validation(format!(
                "dimensions must be positive, got {}x{}x{}",
                self.frames, self.height, self.width
            )));
        }
        Ok(())
    }
}

/// Frame rate as a positive rational.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Fps {
    pub num: u32,
    pub den: u32,
}

impl Fps {
    pub fn new(num: u32, den: u32) -> Result<Self> {
        if num == 0 || den == 0 {
            return Err(Error::Validation(format!(
                "fps must be positive, got {num}/{den}"
            )));
        }
        Ok(Fps { num, den })
    }

    pub fn as_f64(&self) -> f64 {
        self.num as f64 / self.den as f64
    }
}

impl Default for Fps {
    fn default() -> Self {
        Fps { num: 24, den: 1 }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ColorSpace {
    #[default]
    Srgb,
}

/// Clamps every value into `[0, 1]` (NaN becomes 0) and warns once if anything moved.
fn clamp_unit(values: &mut [f32], what: &str) {
    let mut clamped = 0usize;
    for v in values.iter_mut() {
        let c = if v.is_nan() { 0.0 } else { v.clamp(0.0, 1.0) };
        if c != *v || v.is_nan() {
            clamped += 1;
            *v = c;
        }
    }
    if clamped > 0 {
        warn!("{what}: clamped {clamped} out-of-range values into [0, 1]");
    }
}

/// Borrowed view of one RGB frame.
#[derive(Debug, Clone, Copy)]
pub struct FrameRef<'a> {
    pub data: &'a [f32],
    pub height: usize,
    pub width: usize,
}

impl<'a> FrameRef<'a> {
    pub fn new(data: &'a [f32], height: usize, width: usize) -> Result<Self> {
        if data.len() != height * width * 3 {
            return Err(Error::shape(Axis::Channels, height * width * 3, data.len()));
        }
        Ok(FrameRef {
            data,
            height,
            width,
        })
    }

    pub fn pixel(&self, y: usize, x: usize) -> [f32; 3] {
        let i = (y * self.width + x) * 3;
        [self.data[i], self.data[i + 1], self.data[i + 2]]
    }
}

/// RGB video: the carrier for ground truth, composites, layers and generated output.
#[derive(Debug, Clone, PartialEq)]
pub struct VideoClip {
    dims: Dims,
    data: Vec<f32>,
    pub fps: Fps,
    pub color_space: ColorSpace,
}

impl VideoClip {
    pub fn new(dims: Dims, data: Vec<f32>, fps: Fps) -> Result<Self> {
        dims.validate()?;
        let mut data = data;
        if data.len() != dims.pixel_count() * 3 {
            return Err(Error::shape(
                Axis::Channels,
                dims.pixel_count() * 3,
                data.len(),
            ));
        }
        clamp_unit(&mut data, "video clip");
        Ok(VideoClip {
            dims,
            data,
            fps,
            color_space: ColorSpace::Srgb,
        })
    }

    pub fn filled(dims: Dims, rgb: [f32; 3]) -> Result<Self> {
        let data = std::iter::repeat_n(rgb, dims.pixel_count())
            .flatten()
            .collect();
        Self::new(dims, data, Fps::default())
    }

    pub fn zeros(dims: Dims) -> Result<Self> {
        Self::filled(dims, [0.0; 3])
    }

    /// Builds a clip by evaluating `f(t, y, x)` at every pixel.
    pub fn from_fn(dims: Dims, mut f: impl FnMut(usize, usize, usize) -> [f32; 3]) -> Result<Self> {
        let mut data = Vec::with_capacity(dims.pixel_count() * 3);
        for t in 0..dims.frames {
            for y in 0..dims.height {
                for x in 0..dims.width {
                    data.extend_from_slice(&f(t, y, x));
                }
            }
        }
        Self::new(dims, data, Fps::default())
    }

    pub fn with_fps(mut self, fps: Fps) -> Self {
        self.fps = fps;
        self
    }

    pub fn dims(&self) -> Dims {
        self.dims
    }

    pub fn frames(&self) -> usize {
        self.dims.frames
    }

    pub fn height(&self) -> usize {
        self.dims.height
    }

    pub fn width(&self) -> usize {
        self.dims.width
    }

    pub fn as_slice(&self) -> &[f32] {
        &self.data
    }

    pub fn into_vec(self) -> Vec<f32> {
        self.data
    }

    pub fn frame_len(&self) -> usize {
        self.dims.pixels_per_frame() * 3
    }

    pub fn frame(&self, t: usize) -> FrameRef<'_> {
        let n = self.frame_len();
        FrameRef {
            data: &self.data[t * n..(t + 1) * n],
            height: self.dims.height,
            width: self.dims.width,
        }
    }

    pub fn pixel(&self, t: usize, y: usize, x: usize) -> [f32; 3] {
        let i = ((t * self.dims.height + y) * self.dims.width + x) * 3;
        [self.data[i], self.data[i + 1], self.data[i + 2]]
    }

    pub fn set_pixel(&mut self, t: usize, y: usize, x: usize, rgb: [f32; 3]) {
        let i = ((t * self.dims.height + y) * self.dims.width + x) * 3;
        for (dst, v) in self.data[i..i + 3].iter_mut().zip(rgb) {
            *dst = v.clamp(0.0, 1.0);
        }
    }

    /// Copies frames `[start, end)` into a new clip.
    pub fn slice_frames(&self, start: usize, end: usize) -> Result<Self> {
        if start >= end || end > self.dims.frames {
            return Err(Error::Param(format!(
                "frame range {start}..{end} invalid for {} frames",
                self.dims.frames
            )));
        }
        let n = self.frame_len();
        Ok(VideoClip {
            dims: Dims::new(end - start, self.dims.height, self.dims.width),
            data: self.data[start * n..end * n].to_vec(),
            fps: self.fps,
            color_space: self.color_space,
        })
    }

    /// Values quantized to 8 bits, the precision at file boundaries.
    pub fn to_u8(&self) -> Vec<u8> {
        self.data.iter().map(|&v| quantize(v)).collect()
    }

    pub fn from_u8(dims: Dims, bytes: &[u8], fps: Fps) -> Result<Self> {
        Self::new(dims, bytes.iter().map(|&b| dequantize(b)).collect(), fps)
    }
}

pub(crate) fn quantize(v: f32) -> u8 {
    (v.clamp(0.0, 1.0) * 255.0).round() as u8
}

pub(crate) fn dequantize(b: u8) -> f32 {
    b as f32 / 255.0
}

/// Per-pixel straight alpha, one value per pixel of a companion clip.
#[derive(Debug, Clone, PartialEq)]
pub struct AlphaMatte {
    dims: Dims,
    data: Vec<f32>,
}

impl AlphaMatte {
    pub fn new(dims: Dims, data: Vec<f32>) -> Result<Self> {
        dims.validate()?;
        let mut data = data;
        if data.len() != dims.pixel_count() {
            return Err(Error::shape(Axis::Channels, dims.pixel_count(), data.len()));
        }
        clamp_unit(&mut data, "alpha matte");
        Ok(AlphaMatte { dims, data })
    }

    pub fn filled(dims: Dims, value: f32) -> Result<Self> {
        Self::new(dims, vec![value; dims.pixel_count()])
    }

    pub fn from_fn(dims: Dims, mut f: impl FnMut(usize, usize, usize) -> f32) -> Result<Self> {
        let mut data = Vec::with_capacity(dims.pixel_count());
        for t in 0..dims.frames {
            for y in 0..dims.height {
                for x in 0..dims.width {
                    data.push(f(t, y, x));
                }
            }
        }
        Self::new(dims, data)
    }

    pub fn dims(&self) -> Dims {
        self.dims
    }

    pub fn as_slice(&self) -> &[f32] {
        &self.data
    }

    pub fn get(&self, t: usize, y: usize, x: usize) -> f32 {
        self.data[(t * self.dims.height + y) * self.dims.width + x]
    }
}

impl From<&BinaryMaskVideo> for AlphaMatte {
    fn from(mask: &BinaryMaskVideo) -> Self {
        AlphaMatte {
            dims: mask.dims,
            data: mask.data.iter().map(|&b| b as f32).collect(),
        }
    }
}

/// Single-channel float video, e.g. the luma of a difference clip.
#[derive(Debug, Clone, PartialEq)]
pub struct GrayVideo {
    dims: Dims,
    data: Vec<f32>,
}

impl GrayVideo {
    pub fn new(dims: Dims, data: Vec<f32>) -> Result<Self> {
        dims.validate()?;
        let mut data = data;
        if data.len() != dims.pixel_count() {
            return Err(Error::shape(Axis::Channels, dims.pixel_count(), data.len()));
        }
        clamp_unit(&mut data, "gray video");
        Ok(GrayVideo { dims, data })
    }

    pub fn dims(&self) -> Dims {
        self.dims
    }

    pub fn as_slice(&self) -> &[f32] {
        &self.data
    }
}

/// Binary mask video with values strictly in `{0, 1}`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct BinaryMaskVideo {
    dims: Dims,
    data: Vec<u8>,
}

impl BinaryMaskVideo {
    pub fn new(dims: Dims, data: Vec<u8>) -> Result<Self> {
        dims.validate()?;
        if data.len() != dims.pixel_count() {
            return Err(Error::shape(Axis::Channels, dims.pixel_count(), data.len()));
        }
        if let Some(pos) = data.iter().position(|&v| v > 1) {
            return Err(Error::Validation(format!(
                "binary mask value {} at flat index {pos} is not in {{0, 1}}",
                data[pos]
            )));
        }
        Ok(BinaryMaskVideo { dims, data })
    }

    pub fn zeros(dims: Dims) -> Result<Self> {
        Self::new(dims, vec![0; dims.pixel_count()])
    }

    pub fn ones(dims: Dims) -> Result<Self> {
        Self::new(dims, vec![1; dims.pixel_count()])
    }

    pub fn from_fn(dims: Dims, mut f: impl FnMut(usize, usize, usize) -> bool) -> Result<Self> {
        let mut data = Vec::with_capacity(dims.pixel_count());
        for t in 0..dims.frames {
            for y in 0..dims.height {
                for x in 0..dims.width {
                    data.push(f(t, y, x) as u8);
                }
            }
        }
        Self::new(dims, data)
    }

    /// Unchecked constructor for internal producers that only emit 0/1.
    pub(crate) fn from_raw(dims: Dims, data: Vec<u8>) -> Self {
        debug_assert!(data.iter().all(|&v| v <= 1));
        BinaryMaskVideo { dims, data }
    }

    pub fn dims(&self) -> Dims {
        self.dims
    }

    pub fn as_slice(&self) -> &[u8] {
        &self.data
    }

    pub fn frame(&self, t: usize) -> &[u8] {
        let n = self.dims.pixels_per_frame();
        &self.data[t * n..(t + 1) * n]
    }

    pub fn get(&self, t: usize, y: usize, x: usize) -> bool {
        self.data[(t * self.dims.height + y) * self.dims.width + x] == 1
    }

    pub fn set(&mut self, t: usize, y: usize, x: usize, value: bool) {
        self.data[(t * self.dims.height + y) * self.dims.width + x] = value as u8;
    }

    pub fn count_ones(&self) -> usize {
        self.data.iter().filter(|&&v| v == 1).count()
    }

    pub fn complement(&self) -> Self {
        BinaryMaskVideo::from_raw(self.dims, self.data.iter().map(|&v| 1 - v).collect())
    }

    /// Pixels set in `self` but not in `other`.
    pub fn subtract(&self, other: &BinaryMaskVideo) -> Result<Self> {
        self.dims.ensure_matches(&other.dims)?;
        let data = self
            .data
            .iter()
            .zip(&other.data)
            .map(|(&a, &b)| a & (1 - b))
            .collect();
        Ok(BinaryMaskVideo::from_raw(self.dims, data))
    }

    pub fn intersection_count(&self, other: &BinaryMaskVideo) -> Result<usize> {
        self.dims.ensure_matches(&other.dims)?;
        Ok(self
            .data
            .iter()
            .zip(&other.data)
            .filter(|(&a, &b)| a & b == 1)
            .count())
    }

    /// Intersection over union; two empty masks count as a perfect match.
    pub fn iou(&self, other: &BinaryMaskVideo) -> Result<f64> {
        self.dims.ensure_matches(&other.dims)?;
        let (mut inter, mut union) = (0usize, 0usize);
        for (&a, &b) in self.data.iter().zip(&other.data) {
            inter += (a & b) as usize;
            union += (a | b) as usize;
        }
        Ok(if union == 0 {
            1.0
        } else {
            inter as f64 / union as f64
        })
    }
}
