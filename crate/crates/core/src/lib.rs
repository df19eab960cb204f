//! Data machinery for augmented video compositing.
//!
//! - [`compose`]: straight-alpha `over`, subject re-composition, differences.
//! - [`mask`]: effect-mask derivation (luma, Otsu, morphology, majority filter).
//! - [`trimask`]: tri-state conditioning masks, gray augmentation, keyframes.
//! - [`dataset`]: paired and unpaired samples, the NDJSON manifest, assembly.
//! - [`metrics`]: directional embedding similarity, SSIM, PSNR, reports.
//! - [`windowing`]: overlapping temporal windows and their blending.
//! - [`oracle`]: procedural scenes with exactly known decompositions.
//! - [`commands`]: the batch operations behind the `augcomp` binary.

pub mod clip;
pub mod commands;
pub mod compose;
pub mod dataset;
pub mod error;
pub mod io;
pub mod mask;
pub mod metrics;
pub mod oracle;
pub mod trimask;
pub mod windowing;

pub use clip::{AlphaMatte, BinaryMaskVideo, Dims, Fps, FrameRef, GrayVideo, VideoClip};
pub use error::{Error, Result};
