//! Error-diffusion style halftoning: Floyd–Steinberg and dot diffusion.
//!
//! Both quantize error-adjusted darkness at 0.5 (a tie prints ink) and drop
//! error that would leave the image.

use super::screens::knuth_class_matrix;
use crate::imagery::{darkness, BinaryImage, GrayImage};
use crate::scalar::Real;

fn quantize<F: Real>(value: F) -> (u8, F) {
    let half = F::of(0.5);
    if value >= half {
        (1, value - F::one())
    } else {
        (0, value)
    }
}

fn darkness_field<F: Real>(img: &GrayImage) -> Vec<F> {
    img.pixels().iter().map(|&p| F::of(darkness(p))).collect()
}

/// Raster-order Floyd–Steinberg with the 7/16, 3/16, 5/16, 1/16 kernel,
/// accumulating error in `F`.
pub fn floyd_steinberg_with<F: Real>(img: &GrayImage) -> BinaryImage {
    let (w, h) = (img.width(), img.height());
    let mut field = darkness_field::<F>(img);
    let mut bits = vec![0u8; w * h];
    let sixteenth = F::one() / F::of(16.0);
    let (e, sw, s, se) = (
        F::of(7.0) * sixteenth,
        F::of(3.0) * sixteenth,
        F::of(5.0) * sixteenth,
        sixteenth,
    );
    for row in 0..h {
        for col in 0..w {
            let i = row * w + col;
            let (bit, err) = quantize(field[i]);
            bits[i] = bit;
            if col + 1 < w {
                field[i + 1] = field[i + 1] + err * e;
            }
            if row + 1 < h {
                let below = i + w;
                if col > 0 {
                    field[below - 1] = field[below - 1] + err * sw;
                }
                field[below] = field[below] + err * s;
                if col + 1 < w {
                    field[below + 1] = field[below + 1] + err * se;
                }
            }
        }
    }
    BinaryImage::from_bits_unchecked(w, h, bits)
}

const NEIGHBORS: [(isize, isize, u8); 8] = [
    (-1, -1, 1),
    (-1, 0, 2),
    (-1, 1, 1),
    (0, -1, 2),
    (0, 1, 2),
    (1, -1, 1),
    (1, 0, 2),
    (1, 1, 1),
];

/// Knuth dot diffusion over the tiled 8×8 class matrix.
///
/// Pixels are visited class by class. Each pixel's error goes to its
/// 8-neighbors of higher class, weighted 2 (orthogonal) and 1 (diagonal)
/// and normalized over the eligible ones.
pub fn dot_diffusion_with<F: Real>(img: &GrayImage) -> BinaryImage {
    let (w, h) = (img.width(), img.height());
    let classes = knuth_class_matrix();
    let mut field = darkness_field::<F>(img);
    let mut bits = vec![0u8; w * h];

    let mut order: Vec<usize> = (0..w * h).collect();
    order.sort_by_key(|&i| (classes.at(i / w, i % w), i));

    let mut targets: Vec<(usize, u8)> = Vec::with_capacity(8);
    for i in order {
        let (row, col) = (i / w, i % w);
        let class = classes.at(row, col);
        let (bit, err) = quantize(field[i]);
        bits[i] = bit;

        targets.clear();
        for &(dr, dc, weight) in &NEIGHBORS {
            let (r, c) = (row as isize + dr, col as isize + dc);
            if r < 0 || c < 0 || r >= h as isize || c >= w as isize {
                continue;
            }
            let (r, c) = (r as usize, c as usize);
            if classes.at(r, c) > class {
                targets.push((r * w + c, weight));
            }
        }
        let total: u8 = targets.iter().map(|&(_, wt)| wt).sum();
        if total == 0 {
            continue;
        }
        let unit = err / F::of(f64::from(total));
        for &(j, weight) in &targets {
            field[j] = field[j] + unit * F::of(f64::from(weight));
        }
    }
    BinaryImage::from_bits_unchecked(w, h, bits)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_pixel() {
        let img = GrayImage::new(1, 1, vec![100]).unwrap();
        assert_eq!(floyd_steinberg_with::<f64>(&img).bits(), &[1]);
        assert_eq!(dot_diffusion_with::<f64>(&img).bits(), &[1]);
        let img = GrayImage::new(1, 1, vec![200]).unwrap();
        assert_eq!(floyd_steinberg_with::<f64>(&img).bits(), &[0]);
    }

    #[test]
    fn fs_two_pixel_error_transfer() {
        // darkness 0.4 -> no ink, error 0.4 * 7/16 = 0.175 to the right;
        // second pixel darkness 0.4 + 0.175 = 0.575 -> ink.
        let p = (255.0_f64 * 0.6).round() as u8; // 153 -> darkness 0.4
        let img = GrayImage::new(2, 1, vec![p, p]).unwrap();
        assert_eq!(floyd_steinberg_with::<f64>(&img).bits(), &[0, 1]);
    }

    #[test]
    fn f32_and_f64_agree_on_extremes() {
        for v in [0u8, 255] {
            let img = GrayImage::filled(17, 9, v);
            assert_eq!(
                floyd_steinberg_with::<f32>(&img),
                floyd_steinberg_with::<f64>(&img)
            );
            assert_eq!(
                dot_diffusion_with::<f32>(&img),
                dot_diffusion_with::<f64>(&img)
            );
        }
    }
}
