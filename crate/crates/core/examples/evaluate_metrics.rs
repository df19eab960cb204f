//! Scores three candidate generations against an oracle scene with SSIM, PSNR and the
//! embedding metrics (in-process mock provider).
//!
//! ```text
//! cargo run --example evaluate_metrics
//! ```

use augcomp::metrics::{evaluate_pair, ClipIds, MockProvider};
use augcomp::oracle::{generate, perturb, OracleScene};

fn main() -> anyhow::Result<()> {
    let b = generate(&OracleScene::seeded(5, 8, 64, 64))?;
    let noisy = perturb(&b, 0.01, 0.0, 1)?.gt;
    let mut provider = MockProvider::default();

    for (name, gen) in [
        ("perfect", &b.gt),
        ("noisy", &noisy),
        ("no effect", &b.over),
    ] {
        let report = evaluate_pair(
            &b.gt,
            &b.over,
            gen,
            &mut provider,
            Some("a box casts a shadow"),
            ClipIds::default(),
        )?;
        let fmt = |v: Option<f64>| v.map_or("n/a".to_string(), |v| format!("{v:.3}"));
        println!(
            "{name:>9}: SSIM {} PSNR {} CLIP_dir {} CLIP_img {} ({} frame errors)",
            fmt(report.ssim.mean),
            fmt(report.psnr.mean),
            fmt(report.clip_dir.mean),
            fmt(report.clip_img.mean),
            report.errors.len()
        );
    }
    Ok(())
}
