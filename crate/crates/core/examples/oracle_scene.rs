//! Renders one procedural shadow scene and writes every layer as PNG frames.
//!
//! ```text
//! cargo run --example oracle_scene -- <out_dir> [seed]
//! ```

use std::path::PathBuf;

use anyhow::Context;
use augcomp::io;
use augcomp::oracle::{generate, OracleScene};

fn main() -> anyhow::Result<()> {
    let mut args = std::env::args().skip(1);
    let out = PathBuf::from(
        args.next()
            .context("usage: oracle_scene <out_dir> [seed]")?,
    );
    let seed: u64 = args.next().map(|s| s.parse()).transpose()?.unwrap_or(0);

    let scene = OracleScene::seeded(seed, 24, 64, 64);
    println!("{}", serde_json::to_string_pretty(&scene)?);
    let b = generate(&scene)?;

    io::write_clip(&out.join("gt"), &b.gt)?;
    io::write_clip(&out.join("over"), &b.over)?;
    io::write_clip(&out.join("fg"), &b.fg_star)?;
    io::write_clip(&out.join("bg"), &b.bg)?;
    io::write_alpha(&out.join("alpha"), &b.alpha)?;
    io::write_binary_mask(&out.join("subject"), &b.subject_mask)?;
    io::write_binary_mask(&out.join("effect_truth"), &b.effect_mask_truth)?;
    println!(
        "wrote {} frames to {} ({} shadow pixels)",
        scene.frames,
        out.display(),
        b.effect_mask_truth.count_ones()
    );
    Ok(())
}
