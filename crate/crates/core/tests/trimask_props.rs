mod common;

use augcomp::clip::{BinaryMaskVideo, Dims};
use augcomp::trimask::{
    expand_keyframes, from_binary, gray_augment, validate, FrameState, KeyframeSet, TriMask,
    EFFECT, NO_EFFECT, UNKNOWN,
};
use common::{random_mask, rng};
use proptest::prelude::*;

#[test]
fn from_binary_trivial_cases() {
    let d = Dims::new(3, 4, 5);
    let zeros = from_binary(&BinaryMaskVideo::zeros(d).unwrap());
    assert!(zeros.states().iter().all(|s| *s == FrameState::Annotated));
    assert!(zeros.as_slice().iter().all(|&v| v == NO_EFFECT));
    let ones = from_binary(&BinaryMaskVideo::ones(d).unwrap());
    assert!(ones.as_slice().iter().all(|&v| v == EFFECT));
}

#[test]
fn from_binary_round_trips() {
    let mut r = rng(1);
    for _ in 0..20 {
        let m = random_mask(&mut r, Dims::new(4, 7, 9), 0.4);
        assert_eq!(from_binary(&m).to_binary(), m);
    }
}

#[test]
fn gray_augment_extremes() {
    let mut r = rng(2);
    let tri = from_binary(&random_mask(&mut r, Dims::new(12, 5, 5), 0.3));
    assert_eq!(gray_augment(&tri, 0.0, 9).unwrap(), tri);
    let all = gray_augment(&tri, 1.0, 9).unwrap();
    assert!(all.states().iter().all(|s| *s == FrameState::Unknown));
    assert!(all.as_slice().iter().all(|&v| v == UNKNOWN));
    assert!(gray_augment(&tri, -0.1, 0).is_err());
    assert!(gray_augment(&tri, 1.5, 0).is_err());
    assert!(gray_augment(&tri, f64::NAN, 0).is_err());
}

#[test]
fn gray_augment_fraction_within_binomial_bound() {
    let tri = from_binary(&BinaryMaskVideo::zeros(Dims::new(10_000, 1, 1)).unwrap());
    let out = gray_augment(&tri, 0.5, 42).unwrap();
    let unknown = out
        .states()
        .iter()
        .filter(|s| **s == FrameState::Unknown)
        .count();
    let frac = unknown as f64 / 10_000.0;
    assert!((0.48..=0.52).contains(&frac), "unknown fraction {frac}");
}

#[test]
fn single_keyframe_pattern() {
    let key: Vec<u8> = (0..20).map(|i| (i % 3 == 0) as u8).collect();
    let tri = expand_keyframes(&KeyframeSet::new(4, 5).with_key(5, key.clone()), 10).unwrap();
    for t in 0..10 {
        if t == 5 {
            assert_eq!(tri.states()[t], FrameState::Annotated);
            assert_eq!(tri.binary_frame(t).unwrap(), key);
        } else {
            assert_eq!(tri.states()[t], FrameState::Unknown);
            assert!(tri.frame(t).iter().all(|&v| v == UNKNOWN));
        }
    }
    assert!(validate(&tri).is_ok());
}

#[test]
fn empty_keyframes_are_all_unknown() {
    let tri = expand_keyframes(&KeyframeSet::new(3, 3), 10).unwrap();
    assert_eq!(tri, TriMask::unknown(Dims::new(10, 3, 3)));
}

#[test]
fn two_keyframes_checked_pixelwise() {
    let a: Vec<u8> = (0..12).map(|i| (i < 6) as u8).collect();
    let b: Vec<u8> = (0..12).map(|i| (i % 2) as u8).collect();
    let tri = expand_keyframes(
        &KeyframeSet::new(3, 4)
            .with_key(0, a.clone())
            .with_key(9, b.clone()),
        10,
    )
    .unwrap();
    for t in 0..10 {
        let expected: Vec<u8> = match t {
            0 => a.iter().map(|&v| if v == 1 { 255 } else { 0 }).collect(),
            9 => b.iter().map(|&v| if v == 1 { 255 } else { 0 }).collect(),
            _ => vec![128; 12],
        };
        assert_eq!(tri.frame(t), &expected[..], "frame {t}");
    }
}

#[test]
fn bad_keyframes_rejected() {
    let k = vec![0u8; 4];
    assert!(expand_keyframes(
        &KeyframeSet::new(2, 2)
            .with_key(3, k.clone())
            .with_key(3, k.clone()),
        10
    )
    .is_err());
    assert!(expand_keyframes(&KeyframeSet::new(2, 2).with_key(10, k.clone()), 10).is_err());
    assert!(expand_keyframes(
        &KeyframeSet::new(2, 2)
            .with_key(5, k.clone())
            .with_key(2, k.clone()),
        10
    )
    .is_err());
    assert!(expand_keyframes(&KeyframeSet::new(2, 2).with_key(0, vec![0, 2, 0, 0]), 10).is_err());
    assert!(expand_keyframes(&KeyframeSet::new(2, 2), 0).is_err());
}

#[test]
fn validate_reports_offending_frame() {
    let d = Dims::new(3, 2, 2);
    let mut data = vec![0u8; 12];
    data[4 + 3] = UNKNOWN;
    let bad = TriMask::from_parts(d, data, vec![FrameState::Annotated; 3]).unwrap();
    let v = validate(&bad).unwrap_err();
    assert_eq!((v.frame, v.pixel), (1, Some((1, 1))));

    let mut data = vec![UNKNOWN; 12];
    data[8] = EFFECT;
    let states = vec![
        FrameState::Annotated,
        FrameState::Annotated,
        FrameState::Unknown,
    ];
    let mut prefix = data.clone();
    prefix[..8].fill(0);
    let bad = TriMask::from_parts(d, prefix, states).unwrap();
    let v = validate(&bad).unwrap_err();
    assert_eq!((v.frame, v.pixel), (2, Some((0, 0))));
}

fn tri_strategy() -> impl Strategy<Value = (BinaryMaskVideo, f64, u64)> {
    (
        1usize..12,
        1usize..6,
        1usize..6,
        any::<u64>(),
        0.0f64..=1.0,
        any::<u64>(),
    )
        .prop_map(|(t, h, w, ms, p, s)| {
            let mut r = rng(ms);
            (random_mask(&mut r, Dims::new(t, h, w), 0.5), p, s)
        })
}

proptest! {
    #[test]
    fn validate_closure((mask, p, seed) in tri_strategy()) {
        let tri = from_binary(&mask);
        prop_assert!(validate(&tri).is_ok());
        let aug = gray_augment(&tri, p, seed).unwrap();
        prop_assert!(validate(&aug).is_ok());
        let expanded = expand_keyframes(&aug.to_keyframes(), aug.dims().frames).unwrap();
        prop_assert!(validate(&expanded).is_ok());
    }

    #[test]
    fn gray_augment_reproducible_and_subset((mask, p, seed) in tri_strategy()) {
        let tri = gray_augment(&from_binary(&mask), 0.3, seed ^ 1).unwrap();
        let a = gray_augment(&tri, p, seed).unwrap();
        let b = gray_augment(&tri, p, seed).unwrap();
        prop_assert_eq!(&a, &b);
        for t in a.annotated_frames() {
            prop_assert_eq!(tri.states()[t], FrameState::Annotated);
            prop_assert_eq!(a.frame(t), tri.frame(t));
        }
    }

    #[test]
    fn keyframe_round_trip((mask, p, seed) in tri_strategy()) {
        let tri = gray_augment(&from_binary(&mask), p, seed).unwrap();
        prop_assert_eq!(expand_keyframes(&tri.to_keyframes(), tri.dims().frames).unwrap(), tri);
    }
}
