//! Effect-mask derivation on an oracle shadow scene, with and without salt-and-pepper noise.
//!
//! ```text
//! cargo run --example effect_mask -- [seed]
//! ```

use augcomp::mask::{derive_effect_mask, MorphParams};
use augcomp::oracle::{generate, perturb, OracleScene};

fn main() -> anyhow::Result<()> {
    let seed: u64 = std::env::args()
        .nth(1)
        .map(|s| s.parse())
        .transpose()?
        .unwrap_or(0);
    let scene = OracleScene::seeded(seed, 24, 64, 64);
    let bundle = generate(&scene)?;
    let truth = &bundle.effect_mask_truth;

    let params = MorphParams::default();
    let clean = derive_effect_mask(&bundle.gt, &bundle.over, &bundle.subject_mask, &params)?;
    println!(
        "clean: threshold {:?}, {} effect pixels (truth {}), IoU {:.4}",
        clean.threshold,
        clean.mask.count_ones(),
        truth.count_ones(),
        clean.mask.iou(truth)?
    );

    let noisy = perturb(&bundle, 0.0, 0.01, seed)?;
    for median_kernel in [1, 3, 5] {
        let p = MorphParams {
            median_kernel,
            ..params
        };
        let m = derive_effect_mask(&noisy.gt, &bundle.over, &bundle.subject_mask, &p)?;
        println!(
            "1% salt-and-pepper, median {median_kernel}: IoU {:.4}",
            m.mask.iou(truth)?
        );
    }
    Ok(())
}
