//! Porter-Duff `over` on a small synthetic clip, then re-composition of the subject alone.
//!
//! ```text
//! cargo run --example compose_layers
//! ```

use augcomp::clip::{AlphaMatte, BinaryMaskVideo, Dims, VideoClip};
use augcomp::compose::{compose_subject_over, diff_delta, over, recompose_check};

fn main() -> anyhow::Result<()> {
    let dims = Dims::new(4, 32, 48);
    let bg = VideoClip::from_fn(dims, |_, _, x| {
        let v = 0.2 + 0.6 * x as f32 / 47.0;
        [v, v, 0.9]
    })?;
    let fg = VideoClip::filled(dims, [0.9, 0.3, 0.1])?;

    // A solid subject square plus a soft halo that stands in for an effect layer.
    let subject = BinaryMaskVideo::from_fn(dims, |t, y, x| {
        (10..20).contains(&y) && (8 + 4 * t..18 + 4 * t).contains(&x)
    })?;
    let alpha = AlphaMatte::from_fn(dims, |t, y, x| {
        if subject.get(t, y, x) {
            1.0
        } else if (20..26).contains(&y) && (8 + 4 * t..18 + 4 * t).contains(&x) {
            0.4
        } else {
            0.0
        }
    })?;

    let with_effect = over(&fg, &alpha, &bg)?;
    let without_effect = compose_subject_over(&fg, &subject, &bg)?;
    let residual = recompose_check(&fg, &alpha, &bg, &with_effect)?;
    println!(
        "recomposition residual: mean {:.2e}, max {:.2e}",
        residual.mean_abs, residual.max_abs
    );

    let delta = diff_delta(&with_effect, &without_effect)?;
    let changed = delta
        .as_slice()
        .chunks(3)
        .filter(|p| p.iter().any(|&v| v > 0.0))
        .count();
    println!(
        "{changed} of {} pixels differ between the with/without-effect clips",
        dims.pixel_count()
    );
    println!("frame 0, row 22: {:?}", with_effect.pixel(0, 22, 12));
    Ok(())
}
