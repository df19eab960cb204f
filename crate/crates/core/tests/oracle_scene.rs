use augcomp::compose::recompose_check;
use augcomp::oracle::{generate, perturb, OracleScene};

#[test]
fn gt_differs_from_over_exactly_on_truth() {
    for seed in 0..10 {
        let scene = OracleScene::seeded(seed, 8, 64, 64);
        let b = generate(&scene).unwrap();
        let d = b.gt.dims();
        for t in 0..d.frames {
            for y in 0..d.height {
                for x in 0..d.width {
                    let differs = b.gt.pixel(t, y, x) != b.over.pixel(t, y, x);
                    assert_eq!(
                        differs,
                        b.effect_mask_truth.get(t, y, x),
                        "seed {seed} at ({t},{y},{x})"
                    );
                }
            }
        }
        assert_eq!(
            b.effect_mask_truth
                .intersection_count(&b.subject_mask)
                .unwrap(),
            0
        );
        assert!(b.effect_mask_truth.count_ones() > 0);
    }
}

#[test]
fn analytic_closed_forms() {
    let scene = OracleScene::seeded(4, 6, 48, 64);
    let kappa = scene.shadow.kappa;
    let b = generate(&scene).unwrap();
    let d = b.gt.dims();
    for t in 0..d.frames {
        for y in 0..d.height {
            for x in 0..d.width {
                let (gt, bg) = (b.gt.pixel(t, y, x), b.bg.pixel(t, y, x));
                if b.subject_mask.get(t, y, x) {
                    assert_eq!(gt, scene.subject.color);
                } else if b.effect_mask_truth.get(t, y, x) {
                    for c in 0..3 {
                        assert!((gt[c] - kappa * bg[c]).abs() <= 1e-6);
                    }
                } else {
                    assert_eq!(gt, bg);
                }
            }
        }
    }
    let r = recompose_check(&b.fg_star, &b.alpha, &b.bg, &b.gt).unwrap();
    assert!(r.max_abs <= 1e-7);
}

#[test]
fn generation_is_deterministic() {
    let scene = OracleScene::seeded(11, 5, 40, 40);
    assert_eq!(generate(&scene).unwrap(), generate(&scene).unwrap());
    let json = serde_json::to_string(&scene).unwrap();
    let back: OracleScene = serde_json::from_str(&json).unwrap();
    assert_eq!(generate(&back).unwrap(), generate(&scene).unwrap());
}

#[test]
fn subject_leaving_frame_rejected() {
    let mut scene = OracleScene::seeded(1, 10, 48, 48);
    scene.subject.velocity = [5.0, 0.0];
    assert!(generate(&scene).is_err());
}

#[test]
fn perturb_contract() {
    let b = generate(&OracleScene::seeded(2, 4, 32, 32)).unwrap();
    assert_eq!(perturb(&b, 0.0, 0.0, 5).unwrap(), b);
    let p = perturb(&b, 0.0, 0.01, 5).unwrap();
    let changed = (0..b.gt.dims().pixel_count())
        .filter(|&i| b.gt.as_slice()[i * 3..i * 3 + 3] != p.gt.as_slice()[i * 3..i * 3 + 3])
        .count();
    let flips = (0.01 * 4.0 * 32.0 * 32.0f64).floor() as usize;
    // No scene pixel is pure black or white, so every flip is visible.
    assert_eq!(changed, flips);
    assert_eq!(
        perturb(&b, 0.02, 0.01, 5).unwrap(),
        perturb(&b, 0.02, 0.01, 5).unwrap()
    );
    assert_ne!(
        perturb(&b, 0.02, 0.01, 5).unwrap(),
        perturb(&b, 0.02, 0.01, 6).unwrap()
    );
}
