//! Plans overlapping windows over a long clip and blends per-window outputs.
//!
//! ```text
//! cargo run --example temporal_windows -- [frames]
//! ```

use augcomp::clip::{Dims, VideoClip};
use augcomp::trimask::TriMask;
use augcomp::windowing::{plan, run_windowed, DEFAULT_STRIDE, DEFAULT_WINDOW};

fn main() -> anyhow::Result<()> {
    let frames: usize = std::env::args()
        .nth(1)
        .map(|s| s.parse())
        .transpose()?
        .unwrap_or(149);
    let p = plan(frames, DEFAULT_WINDOW, DEFAULT_STRIDE)?;
    println!("{frames} frames -> windows {:?}", p.windows);
    if let [(_, first_end), (second_start, _), ..] = p.windows[..] {
        for f in second_start..first_end {
            println!(
                "frame {f:3}: w0 {:.4}  w1 {:.4}",
                p.weights[0][f],
                p.weights[1][f - second_start]
            );
        }
    }

    let clip = VideoClip::zeros(Dims::new(frames, 4, 4))?;
    let out = run_windowed(&clip, &TriMask::unknown(clip.dims()), &p, |i, c, _| {
        VideoClip::filled(c.dims(), [i as f32; 3])
    })?;
    let levels: Vec<String> = (0..frames)
        .step_by(8)
        .map(|t| format!("{:.2}", out.pixel(t, 0, 0)[0]))
        .collect();
    println!("window-index output every 8th frame: {}", levels.join(" "));
    Ok(())
}
