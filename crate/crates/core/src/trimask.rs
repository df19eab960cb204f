//! Tri-state conditioning masks: known no-effect (0), known effect (255), unknown (128).
//!
//! Unknown is a whole-frame state; an unknown frame is uniformly 128.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::clip::{BinaryMaskVideo, Dims};
use crate::error::{Error, Result};

pub const NO_EFFECT: u8 = 0;
pub const EFFECT: u8 = 255;
pub const UNKNOWN: u8 = 128;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FrameState {
    Annotated,
    Unknown,
}

impl FrameState {
    pub fn as_str(&self) -> &'static str {
        match self {
            FrameState::Annotated => "annotated",
            FrameState::Unknown => "unknown",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "annotated" => Some(FrameState::Annotated),
            "unknown" => Some(FrameState::Unknown),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TriMask {
    dims: Dims,
    data: Vec<u8>,
    states: Vec<FrameState>,
}

/// First invariant breach found by [`validate`].
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Violation {
    pub frame: usize,
    /// `(y, x)` of the offending pixel, absent for frame-level problems.
    pub pixel: Option<(usize, usize)>,
    pub message: String,
}

impl std::fmt::Display for Violation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self.pixel {
            Some((y, x)) => write!(f, "frame {} pixel ({y}, {x}): {}", self.frame, self.message),
            None => write!(f, "frame {}: {}", self.frame, self.message),
        }
    }
}

impl TriMask {
    /// Raw constructor; checks sizes only. Use [`validate`] for the value invariants.
    pub fn from_parts(dims: Dims, data: Vec<u8>, states: Vec<FrameState>) -> Result<Self> {
        if data.len() != dims.pixel_count() {
            return Err(Error::shape(
                crate::error::Axis::Channels,
                dims.pixel_count(),
                data.len(),
            ));
        }
        if states.len() != dims.frames {
            return Err(Error::shape(
                crate::error::Axis::Frames,
                dims.frames,
                states.len(),
            ));
        }
        Ok(TriMask { dims, data, states })
    }

    /// Every frame unknown.
    pub fn unknown(dims: Dims) -> Self {
        TriMask {
            dims,
            data: vec![UNKNOWN; dims.pixel_count()],
            states: vec![FrameState::Unknown; dims.frames],
        }
    }

    pub fn dims(&self) -> Dims {
        self.dims
    }

    pub fn as_slice(&self) -> &[u8] {
        &self.data
    }

    pub fn states(&self) -> &[FrameState] {
        &self.states
    }

    pub fn frame(&self, t: usize) -> &[u8] {
        let n = self.dims.pixels_per_frame();
        &self.data[t * n..(t + 1) * n]
    }

    pub fn annotated_frames(&self) -> impl Iterator<Item = usize> + '_ {
        self.states
            .iter()
            .enumerate()
            .filter(|(_, s)| **s == FrameState::Annotated)
            .map(|(t, _)| t)
    }

    fn set_unknown(&mut self, t: usize) {
        let n = self.dims.pixels_per_frame();
        self.data[t * n..(t + 1) * n].fill(UNKNOWN);
        self.states[t] = FrameState::Unknown;
    }

    /// Binary pixels of an annotated frame; `None` for unknown frames.
    pub fn binary_frame(&self, t: usize) -> Option<Vec<u8>> {
        (self.states[t] == FrameState::Annotated)
            .then(|| self.frame(t).iter().map(|&v| (v == EFFECT) as u8).collect())
    }

    /// Back to a binary video; unknown frames become all-zero.
    pub fn to_binary(&self) -> BinaryMaskVideo {
        let n = self.dims.pixels_per_frame();
        let mut data = vec![0u8; self.dims.pixel_count()];
        for t in self.annotated_frames() {
            for (dst, &v) in data[t * n..(t + 1) * n].iter_mut().zip(self.frame(t)) {
                *dst = (v == EFFECT) as u8;
            }
        }
        BinaryMaskVideo::from_raw(self.dims, data)
    }

    /// Annotated frames as a keyframe set.
    pub fn to_keyframes(&self) -> KeyframeSet {
        KeyframeSet {
            height: self.dims.height,
            width: self.dims.width,
            entries: self
                .annotated_frames()
                .map(|t| (t, self.binary_frame(t).expect("annotated")))
                .collect(),
        }
    }

    pub fn slice_frames(&self, start: usize, end: usize) -> Result<Self> {
        if start >= end || end > self.dims.frames {
            return Err(Error::Param(format!(
                "frame range {start}..{end} invalid for {} frames",
                self.dims.frames
            )));
        }
        let n = self.dims.pixels_per_frame();
        Ok(TriMask {
            dims: Dims::new(end - start, self.dims.height, self.dims.width),
            data: self.data[start * n..end * n].to_vec(),
            states: self.states[start..end].to_vec(),
        })
    }
}

/// Every frame annotated; 1 maps to 255, 0 to 0.
pub fn from_binary(mask: &BinaryMaskVideo) -> TriMask {
    TriMask {
        dims: mask.dims(),
        data: mask.as_slice().iter().map(|&v| v * EFFECT).collect(),
        states: vec![FrameState::Annotated; mask.dims().frames],
    }
}

/// Independently replaces each annotated frame with a uniform unknown frame with
/// probability `gray_prob`. Deterministic for a given seed.
pub fn gray_augment(mask: &TriMask, gray_prob: f64, seed: u64) -> Result<TriMask> {
    if !(0.0..=1.0).contains(&gray_prob) {
        return Err(Error::Param(format!(
            "gray_prob must be in [0, 1], got {gray_prob}"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = mask.clone();
    for t in 0..mask.dims.frames {
        // One draw per frame regardless of state keeps the stream aligned with frame index.
        let draw: f64 = rng.random();
        if mask.states[t] == FrameState::Annotated && draw < gray_prob {
            out.set_unknown(t);
        }
    }
    Ok(out)
}

/// Sparse per-frame annotations.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct KeyframeSet {
    pub height: usize,
    pub width: usize,
    /// `(frame index, binary mask of H*W values in {0, 1})`, sorted by index.
    pub entries: Vec<(usize, Vec<u8>)>,
}

impl KeyframeSet {
    pub fn new(height: usize, width: usize) -> Self {
        KeyframeSet {
            height,
            width,
            entries: Vec::new(),
        }
    }

    pub fn with_key(mut self, index: usize, mask: Vec<u8>) -> Self {
        self.entries.push((index, mask));
        self
    }
}

/// Keyframes become annotated frames; all other frames are uniform unknown.
/// Mask pixels are never interpolated between keys.
pub fn expand_keyframes(keys: &KeyframeSet, total_frames: usize) -> Result<TriMask> {
    if total_frames == 0 {
        return Err(Error::Param("total_frames must be >= 1".into()));
    }
    let dims = Dims::new(total_frames, keys.height, keys.width);
    let n = dims.pixels_per_frame();
    let mut out = TriMask::unknown(dims);
    let mut prev: Option<usize> = None;
    for (index, pixels) in &keys.entries {
        let index = *index;
        if index >= total_frames {
            return Err(Error::Validation(format!(
                "keyframe index {index} out of range for {total_frames} frames"
            )));
        }
        if prev.is_some_and(|p| index <= p) {
            return Err(Error::Validation(format!(
                "keyframe indices must be strictly increasing; {index} follows {}",
                prev.unwrap()
            )));
        }
        if pixels.len() != n {
            return Err(Error::shape(crate::error::Axis::Channels, n, pixels.len()));
        }
        if let Some(bad) = pixels.iter().position(|&v| v > 1) {
            return Err(Error::Validation(format!(
                "keyframe {index} has non-binary value {} at {bad}",
                pixels[bad]
            )));
        }
        for (dst, &v) in out.data[index * n..(index + 1) * n].iter_mut().zip(pixels) {
            *dst = v * EFFECT;
        }
        out.states[index] = FrameState::Annotated;
        prev = Some(index);
    }
    Ok(out)
}

/// Checks the tri-mask invariants and reports the first offending frame and pixel.
pub fn validate(mask: &TriMask) -> Result<(), Violation> {
    let w = mask.dims.width;
    for (t, state) in mask.states.iter().enumerate() {
        for (i, &v) in mask.frame(t).iter().enumerate() {
            let ok = match state {
                FrameState::Annotated => v == NO_EFFECT || v == EFFECT,
                FrameState::Unknown => v == UNKNOWN,
            };
            if !ok {
                return Err(Violation {
                    frame: t,
                    pixel: Some((i / w, i % w)),
                    message: format!("value {v} not allowed in {} frame", state.as_str()),
                });
            }
        }
    }
    Ok(())
}
