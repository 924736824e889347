mod common;

use printchan::channel::{derive_seed, gen_noise, NoisePower};
use printchan::halftone::halftone_floyd_steinberg;
use printchan::imagery::Histogram;
use printchan::metrics::{
    euclidean_distance, image_relative_entropy, noise_entropy_curve, relative_entropy,
    HistogramSpec, Smoothing,
};
use printchan::BinaryImage;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn all_2x2() -> Vec<BinaryImage> {
    (0u8..16)
        .map(|m| BinaryImage::from_fn(2, 2, |r, c| m >> (r * 2 + c) & 1 == 1))
        .collect()
}

#[test]
fn euclid_is_a_metric_on_2x2() {
    let imgs = all_2x2();
    let d = |a: &BinaryImage, b: &BinaryImage| euclidean_distance::<f64, _>(a, b).unwrap();
    for a in &imgs {
        assert_eq!(d(a, a), 0.0);
        for b in &imgs {
            assert_eq!(d(a, b), d(b, a));
            if a != b {
                assert!(d(a, b) > 0.0);
            }
            for c in &imgs {
                assert!(d(a, c) <= d(a, b) + d(b, c) + 1e-15);
            }
        }
    }
}

fn random_histogram(rng: &mut ChaCha8Rng, bins: usize) -> Histogram<f64> {
    let raw: Vec<f64> = (0..bins).map(|_| rng.random::<f64>() + 1e-3).collect();
    let sum: f64 = raw.iter().sum();
    let mut p: Vec<f64> = raw.iter().map(|v| v / sum).collect();
    let rest: f64 = p[1..].iter().sum();
    p[0] = 1.0 - rest;
    Histogram::from_probabilities(p).unwrap()
}

#[test]
fn gibbs_inequality_on_random_pairs() {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    for _ in 0..10_000 {
        let bins = rng.random_range(2..12);
        let p = random_histogram(&mut rng, bins);
        let q = random_histogram(&mut rng, bins);
        let pq = relative_entropy(&p, &q, Smoothing::None).unwrap().value();
        assert!(pq >= 0.0);
        assert_eq!(
            relative_entropy(&p, &p, Smoothing::None).unwrap().value(),
            0.0
        );
        let max_diff = p
            .bins()
            .iter()
            .zip(q.bins())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        assert_eq!(pq <= 1e-12, max_diff <= 1e-12);
    }
}

#[test]
fn smoothing_converges_to_unsmoothed() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..200 {
        let p = random_histogram(&mut rng, 4);
        let q = random_histogram(&mut rng, 4);
        let exact = relative_entropy(&p, &q, Smoothing::None).unwrap().value();
        let errs: Vec<f64> = [1e-3, 1e-6, 1e-9]
            .iter()
            .map(|&lambda| {
                let v = relative_entropy(&p, &q, Smoothing::Additive(lambda))
                    .unwrap()
                    .value();
                assert!(v.is_finite());
                (v - exact).abs()
            })
            .collect();
        // error shrinks roughly linearly in lambda
        assert!(errs[1] <= 1e-2 * errs[0] + 1e-12, "{errs:?}");
        assert!(errs[2] <= 1e-2 * errs[1] + 1e-12, "{errs:?}");
    }
    // finite even where the unsmoothed value is infinite
    let p = Histogram::<f64>::from_counts(&[0, 5, 5]).unwrap();
    let q = Histogram::<f64>::from_counts(&[5, 5, 0]).unwrap();
    assert!(relative_entropy(&p, &q, Smoothing::None)
        .unwrap()
        .is_infinite());
    for lambda in [1e-3, 1e-6, 1e-9] {
        assert!(relative_entropy(&p, &q, Smoothing::Additive(lambda))
            .unwrap()
            .value()
            .is_finite());
    }
}

#[test]
fn f32_and_f64_agree() {
    let p64 = Histogram::<f64>::from_probabilities(vec![0.5, 0.5]).unwrap();
    let q64 = Histogram::<f64>::from_probabilities(vec![0.25, 0.75]).unwrap();
    let p32 = Histogram::<f32>::from_probabilities(vec![0.5, 0.5]).unwrap();
    let q32 = Histogram::<f32>::from_probabilities(vec![0.25, 0.75]).unwrap();
    let a = relative_entropy(&p64, &q64, Smoothing::None)
        .unwrap()
        .value();
    let b = relative_entropy(&p32, &q32, Smoothing::None)
        .unwrap()
        .value();
    assert!((a - f64::from(b)).abs() < 1e-6);
}

#[test]
fn expected_squared_distance_matches_closed_form() {
    let g = halftone_floyd_steinberg(&common::natural_scene(256, 256, 1, 20));
    let f1 = g.ink_density();
    for (ti, t) in [0.1, 0.3, 0.7].into_iter().enumerate() {
        let p = NoisePower::new(t).unwrap();
        let d = p.achieved_density();
        let samples: Vec<f64> = (0..64)
            .map(|rep| {
                let v = gen_noise(256, 256, p, derive_seed(77, (ti * 64 + rep) as u64));
                euclidean_distance::<f64, _>(&v, &g).unwrap().powi(2)
            })
            .collect();
        let (mean, se) = common::mean_and_stderr(&samples);
        let oracle = f1 * (1.0 - d) + (1.0 - f1) * d;
        assert!(
            (mean - oracle).abs() <= 3.0 * se,
            "t={t}: {mean} vs {oracle} (se {se})"
        );
    }
}

#[test]
fn divergence_minimized_near_ink_density() {
    let g = halftone_floyd_steinberg(&common::natural_scene(256, 256, 3, -45));
    let f1 = g.ink_density();
    let spec = HistogramSpec::<f64>::binary();
    let grid: Vec<f64> = (1..20).map(|i| i as f64 * 0.05).collect();
    let (best, _) = grid
        .iter()
        .map(|&t| {
            let v = gen_noise(256, 256, NoisePower::new(t).unwrap(), 9);
            (t, image_relative_entropy(&g, &v, &spec).unwrap().value())
        })
        .fold(
            (0.0, f64::INFINITY),
            |acc, x| if x.1 < acc.1 { x } else { acc },
        );
    assert!((best - f1).abs() <= 0.05 + 1e-9, "argmin {best} vs f1 {f1}");
}

#[test]
fn entropy_curve_is_deterministic_and_peaks_mid() {
    let grid: Vec<NoisePower> = [0.1, 0.3, 0.5, 0.7, 0.9]
        .iter()
        .map(|&t| NoisePower::new(t).unwrap())
        .collect();
    let a = noise_entropy_curve::<f64>(64, 64, &grid, 8, 4).unwrap();
    let b = noise_entropy_curve::<f64>(64, 64, &grid, 8, 4).unwrap();
    assert_eq!(a, b);
    let best = a.iter().max_by(|x, y| x.mean.total_cmp(&y.mean)).unwrap();
    assert_eq!(best.t, 0.5);
    let c = noise_entropy_curve::<f32>(64, 64, &grid, 8, 4).unwrap();
    for (x, y) in a.iter().zip(&c) {
        assert!((x.mean - f64::from(y.mean)).abs() < 1e-5);
    }
}
