//! Builds a tiny dataset (two oracle pairs and one caption-only clip), writes the
//! manifest, reads it back and assembles every sample.
//!
//! ```text
//! cargo run --example paired_dataset -- [out_dir]
//! ```

use std::path::PathBuf;

use augcomp::dataset::{
    assemble, build_paired_sample, build_unpaired_sample, dataset_stats, read_manifest,
    write_manifest, BuildOptions, Manifest, PairedLayers, SampleKind,
};
use augcomp::oracle::{generate, OracleScene};

fn main() -> anyhow::Result<()> {
    let _tmp;
    let root = match std::env::args().nth(1) {
        Some(p) => PathBuf::from(p),
        None => {
            _tmp = tempfile::tempdir()?;
            _tmp.path().to_path_buf()
        }
    };
    env_logger::Builder::new()
        .filter_level(log::LevelFilter::Info)
        .init();

    let opts = BuildOptions {
        gray_prob: 0.2,
        seed: 3,
        ..BuildOptions::default()
    };
    let mut samples = Vec::new();
    for seed in 0..2u64 {
        let b = generate(&OracleScene::seeded(seed, 16, 48, 64))?;
        let layers = PairedLayers {
            gt: &b.gt,
            fg_star: &b.fg_star,
            alpha: &b.alpha,
            bg: &b.bg,
            subject: &b.subject_mask,
        };
        let built = build_paired_sample(
            &root,
            &format!("pair_{seed}"),
            SampleKind::PairedSynthetic,
            layers,
            "a block slides across a checkerboard and casts a shadow",
            "oracle",
            &opts,
        )?;
        println!(
            "{}: residual {:.1e}, effect pixels {}",
            built.sample.id,
            built.residual.mean_abs,
            built.effect.mask.count_ones()
        );
        samples.push(built.sample);
    }
    let plain = generate(&OracleScene::seeded(9, 16, 48, 64))?.bg;
    samples.push(build_unpaired_sample(
        &root,
        "caption_only",
        &plain,
        "an empty checkerboard floor",
        "web",
    )?);

    let path = root.join("manifest.ndjson");
    write_manifest(&Manifest::new(samples), &path)?;
    print!("{}", std::fs::read_to_string(&path)?);

    let manifest = read_manifest(&path)?;
    for s in &manifest.samples {
        let bundle = assemble(s, &root)?;
        println!(
            "{}: {} frames, conditioning {}, annotated frames {}",
            s.id,
            bundle.gt.frames(),
            bundle.conditioning_present,
            bundle.trimask.annotated_frames().count()
        );
    }
    println!(
        "{}",
        serde_json::to_string_pretty(&dataset_stats(&manifest, Some(&root))?)?
    );
    Ok(())
}
