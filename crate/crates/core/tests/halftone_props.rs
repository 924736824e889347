mod common;

use printchan::halftone::{
    halftone, halftone_bayer, halftone_block_d, halftone_dot_diffusion, halftone_floyd_steinberg,
    halftone_random, halftone_threshold, HalftoneSpec,
};
use printchan::imagery::darkness;
use printchan::{BinaryImage, GrayImage};
use proptest::prelude::*;

fn spec_strategy() -> impl Strategy<Value = HalftoneSpec> {
    prop_oneof![
        (0.0f64..=1.0).prop_map(|level| HalftoneSpec::Threshold { level }),
        any::<u64>().prop_map(|seed| HalftoneSpec::Random { seed }),
        Just(HalftoneSpec::FloydSteinberg),
        prop_oneof![Just(2usize), Just(4), Just(8)].prop_map(|order| HalftoneSpec::Bayer { order }),
        prop_oneof![Just(4usize), Just(8)].prop_map(|order| HalftoneSpec::ClusteredDot { order }),
        Just(HalftoneSpec::DotDiffusion),
        (1usize..40).prop_map(|h| HalftoneSpec::BlockD { h }),
    ]
}

fn gray_image() -> impl Strategy<Value = GrayImage> {
    (1usize..24, 1usize..24).prop_flat_map(|(w, h)| {
        proptest::collection::vec(any::<u8>(), w * h)
            .prop_map(move |px| GrayImage::new(w, h, px).unwrap())
    })
}

proptest! {
    #[test]
    fn preserves_dimensions_and_is_deterministic(img in gray_image(), spec in spec_strategy()) {
        let a = halftone(&img, &spec).unwrap();
        prop_assert_eq!((a.width(), a.height()), (img.width(), img.height()));
        prop_assert_eq!(a, halftone(&img, &spec).unwrap());
    }

    #[test]
    fn extremes(w in 1usize..30, h in 1usize..30, spec in spec_strategy()) {
        // threshold maps black to ink only for level > 0, white to blank for level <= 1
        if let HalftoneSpec::Threshold { level } = spec {
            prop_assume!(level > 0.0 && level < 1.0);
        }
        prop_assert_eq!(halftone(&GrayImage::filled(w, h, 0), &spec).unwrap(), BinaryImage::ones(w, h));
        prop_assert_eq!(halftone(&GrayImage::filled(w, h, 255), &spec).unwrap(), BinaryImage::zeros(w, h));
    }

    #[test]
    fn screens_are_monotone(p in 0u8..255, order_idx in 0usize..3, level in 0.0f64..=1.0) {
        let order = [2usize, 4, 8][order_idx];
        let darker = GrayImage::filled(16, 16, p);
        let lighter = GrayImage::filled(16, 16, p + 1);
        let ink = |b: BinaryImage| b.ones_count();
        prop_assert!(ink(halftone_bayer(&darker, order).unwrap()) >= ink(halftone_bayer(&lighter, order).unwrap()));
        let cd = [4usize, 8][order_idx % 2];
        let cdot = HalftoneSpec::ClusteredDot { order: cd };
        prop_assert!(ink(halftone(&darker, &cdot).unwrap()) >= ink(halftone(&lighter, &cdot).unwrap()));
        prop_assert!(ink(halftone_threshold(&darker, level).unwrap()) >= ink(halftone_threshold(&lighter, level).unwrap()));
    }
}

#[test]
fn fs_mid_gray_density() {
    let img = GrayImage::filled(256, 256, 128);
    let f = halftone_floyd_steinberg(&img).ink_density();
    assert!((f - 127.0 / 255.0).abs() <= 0.01, "{f}");
}

#[test]
fn dot_diffusion_mid_gray_density() {
    let img = GrayImage::filled(256, 256, 128);
    let f = halftone_dot_diffusion(&img).ink_density();
    assert!((f - 127.0 / 255.0).abs() <= 0.03, "{f}");
}

#[test]
fn random_mid_gray_within_three_sigma() {
    let img = GrayImage::filled(512, 512, 128);
    let p: f64 = 127.0 / 255.0;
    let sigma = (p * (1.0 - p) / (512.0 * 512.0)).sqrt();
    for seed in [1u64, 2, 3] {
        let f = halftone_random(&img, seed).ink_density();
        assert!((f - p).abs() <= 3.0 * sigma, "seed {seed}: {f}");
    }
}

#[test]
fn density_preserved_over_gray_levels() {
    for level in (0u8..=255).step_by(17) {
        let img = GrayImage::filled(128, 128, level);
        let d = darkness(level);
        let outs = [
            ("fs", halftone_floyd_steinberg(&img)),
            ("random", halftone_random(&img, 11)),
            ("dotdif", halftone_dot_diffusion(&img)),
            ("blockd4", halftone_block_d(&img, 4).unwrap()),
            ("blockd19", halftone_block_d(&img, 19).unwrap()),
        ];
        for (name, out) in outs {
            let f = out.ink_density();
            assert!((f - d).abs() <= 0.03, "{name} level {level}: {f} vs {d}");
        }
    }
}

#[test]
fn natural_image_density_tracks_mean_darkness() {
    let img = common::natural_scene(128, 128, 5, 0);
    let d = img.mean_darkness();
    for spec in [HalftoneSpec::FloydSteinberg, HalftoneSpec::BlockD { h: 8 }] {
        let f = halftone(&img, &spec).unwrap().ink_density();
        assert!((f - d).abs() <= 0.03, "{spec}: {f} vs {d}");
    }
}
