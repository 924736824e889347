#![allow(dead_code)]

use printchan::GrayImage;

/// Deterministic photo-like test image: smooth shading, a few hard-edged
/// shapes and mild grain. `lightness` shifts the whole image (0 leaves the
/// mean near mid-gray, positive values lighten it).
pub fn natural_scene(width: usize, height: usize, seed: u64, lightness: i32) -> GrayImage {
    let mut state = seed ^ 0x2545_F491_4F6C_DD1D;
    let mut grain = move || {
        state ^= state << 13;
        state ^= state >> 7;
        state ^= state << 17;
        (state % 17) as f64 - 8.0
    };
    let phase = (seed % 7) as f64;
    let (w, h) = (width as f64, height as f64);
    GrayImage::from_fn(width, height, |r, c| {
        let (y, x) = (r as f64 / h, c as f64 / w);
        let mut v = 128.0;
        v += 55.0 * (6.0 * x + phase).sin() * (4.0 * y).cos();
        v += 40.0 * (y - 0.5);
        let (dx, dy) = (x - 0.3, y - 0.35);
        if dx * dx + dy * dy < 0.02 {
            v -= 70.0;
        }
        if (0.6..0.85).contains(&x) && (0.55..0.8).contains(&y) {
            v += 60.0;
        }
        v += grain() + f64::from(lightness);
        v.round().clamp(0.0, 255.0) as u8
    })
}

/// Standard error of the mean.
pub fn mean_and_stderr(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

/// KL divergence between Bernoulli(p) and Bernoulli(q) in bits, summed
/// directly from the definition.
pub fn bernoulli_kl(p: f64, q: f64) -> f64 {
    let term = |a: f64, b: f64| if a == 0.0 { 0.0 } else { a * (a / b).log2() };
    term(p, q) + term(1.0 - p, 1.0 - q)
}
