//! Tri-mask construction: sparse keyframes, full annotation and random gray frames.
//!
//! ```text
//! cargo run --example trimask_keyframes
//! ```

use augcomp::clip::{BinaryMaskVideo, Dims};
use augcomp::trimask::{self, FrameState, KeyframeSet, TriMask};

fn strip(mask: &TriMask) -> String {
    mask.states()
        .iter()
        .map(|s| match s {
            FrameState::Annotated => 'A',
            FrameState::Unknown => '.',
        })
        .collect()
}

fn main() -> anyhow::Result<()> {
    let (h, w) = (8, 8);
    let blob: Vec<u8> = (0..h * w)
        .map(|i| ((2..6).contains(&(i / w)) && (3..7).contains(&(i % w))) as u8)
        .collect();

    let single = trimask::expand_keyframes(&KeyframeSet::new(h, w).with_key(12, blob.clone()), 30)?;
    println!("single keyframe   {}", strip(&single));

    let keys = KeyframeSet::new(h, w)
        .with_key(0, blob.clone())
        .with_key(15, blob.clone())
        .with_key(29, blob);
    let sparse = trimask::expand_keyframes(&keys, 30)?;
    println!("three keyframes   {}", strip(&sparse));

    let dims = Dims::new(30, h, w);
    let full = trimask::from_binary(&BinaryMaskVideo::from_fn(dims, |t, y, x| {
        (2..6).contains(&y) && (t / 5..t / 5 + 3).contains(&x)
    })?);
    let augmented = trimask::gray_augment(&full, 0.3, 7)?;
    println!("fully annotated   {}", strip(&full));
    println!("gray_prob 0.3     {}", strip(&augmented));

    for m in [&single, &sparse, &full, &augmented] {
        if let Err(v) = trimask::validate(m) {
            anyhow::bail!("invalid tri-mask: {v}");
        }
    }
    println!(
        "round trip through keyframes: {}",
        trimask::expand_keyframes(&augmented.to_keyframes(), 30)? == augmented
    );
    Ok(())
}
