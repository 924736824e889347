//! Halftoning algorithms behind a single [`HalftoneSpec`] dispatch.
//!
//! `fs` stands in for error-diffusion baselines, `bayer`/`cdot`/`dotdif` for
//! the ordered-dither and dot-diffusion families, and `blockd` is a
//! block-based proxy: each h×h tile gets round(mean darkness × area) ink
//! dots, placed on its darkest pixels.

mod diffusion;
pub mod screens;

pub use diffusion::{dot_diffusion_with, floyd_steinberg_with};

use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::imagery::{BinaryImage, GrayImage};
use screens::Screen;

#[derive(Debug, Error, PartialEq)]
pub enum HalftoneError {
    #[error("unknown algorithm '{0}' (expected one of threshold, random, fs, bayer, cdot, dotdif, blockd)")]
    UnknownAlgorithm(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}

/// A halftoning algorithm together with its parameters.
#[derive(Clone, Debug, PartialEq)]
pub enum HalftoneSpec {
    Threshold { level: f64 },
    Random { seed: u64 },
    FloydSteinberg,
    Bayer { order: usize },
    ClusteredDot { order: usize },
    DotDiffusion,
    BlockD { h: usize },
}

impl HalftoneSpec {
    /// Lowercase CLI token.
    pub fn token(&self) -> &'static str {
        match self {
            Self::Threshold { .. } => "threshold",
            Self::Random { .. } => "random",
            Self::FloydSteinberg => "fs",
            Self::Bayer { .. } => "bayer",
            Self::ClusteredDot { .. } => "cdot",
            Self::DotDiffusion => "dotdif",
            Self::BlockD { .. } => "blockd",
        }
    }

    /// Block size, for `blockd` only.
    pub fn block_size(&self) -> Option<usize> {
        match self {
            Self::BlockD { h } => Some(*h),
            _ => None,
        }
    }

    pub fn is_proxy(&self) -> bool {
        matches!(self, Self::BlockD { .. })
    }

    pub fn validate(&self) -> Result<(), HalftoneError> {
        match *self {
            Self::Threshold { level } => check_level(level),
            Self::Bayer { order } => check_order(order, &[2, 4, 8], "bayer"),
            Self::ClusteredDot { order } => check_order(order, &[4, 8], "cdot"),
            Self::BlockD { h } => check_block(h),
            Self::Random { .. } | Self::FloydSteinberg | Self::DotDiffusion => Ok(()),
        }
    }
}

/// Canonical id, e.g. `fs`, `bayer:order=4`, `blockd:h=19`. Parsed back by
/// [`FromStr`].
impl fmt::Display for HalftoneSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Threshold { level } => write!(f, "threshold:level={level}"),
            Self::Random { seed } => write!(f, "random:seed={seed}"),
            Self::Bayer { order } => write!(f, "bayer:order={order}"),
            Self::ClusteredDot { order } => write!(f, "cdot:order={order}"),
            Self::BlockD { h } => write!(f, "blockd:h={h}"),
            Self::FloydSteinberg | Self::DotDiffusion => f.write_str(self.token()),
        }
    }
}

impl FromStr for HalftoneSpec {
    type Err = HalftoneError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let mut parts = s.trim().split(':');
        let name = parts.next().unwrap_or_default().trim().to_ascii_lowercase();
        let mut level = None;
        let mut seed = None;
        let mut order = None;
        let mut h = None;
        for param in parts {
            let (key, value) = param.split_once('=').ok_or_else(|| {
                HalftoneError::InvalidParameter(format!("'{param}' is not key=value"))
            })?;
            let bad = || HalftoneError::InvalidParameter(format!("bad value for {key}: '{value}'"));
            let value = value.trim();
            match key.trim() {
                "level" => level = Some(value.parse::<f64>().map_err(|_| bad())?),
                "seed" => seed = Some(value.parse::<u64>().map_err(|_| bad())?),
                "order" => order = Some(value.parse::<usize>().map_err(|_| bad())?),
                "h" => h = Some(value.parse::<usize>().map_err(|_| bad())?),
                other => {
                    return Err(HalftoneError::InvalidParameter(format!(
                        "unknown parameter '{other}'"
                    )))
                }
            }
        }
        Params {
            level,
            seed,
            order,
            h,
        }
        .build(&name)
    }
}

/// Loose parameter set as gathered from flags or config entries.
///
/// Every supplied value is validated, even when the chosen algorithm ignores
/// it. Missing required values are errors; `threshold` defaults to level 0.5
/// and the screens to order 8.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Params {
    pub level: Option<f64>,
    pub seed: Option<u64>,
    pub order: Option<usize>,
    pub h: Option<usize>,
}

impl Params {
    pub fn build(&self, name: &str) -> Result<HalftoneSpec, HalftoneError> {
        if let Some(level) = self.level {
            check_level(level)?;
        }
        if let Some(h) = self.h {
            check_block(h)?;
        }
        if let Some(order) = self.order {
            check_order(order, &[2, 4, 8], "screen")?;
        }
        let spec = match name {
            "threshold" => HalftoneSpec::Threshold {
                level: self.level.unwrap_or(0.5),
            },
            "random" => HalftoneSpec::Random {
                seed: self.seed.ok_or_else(|| {
                    HalftoneError::InvalidParameter("random requires a seed".into())
                })?,
            },
            "fs" => HalftoneSpec::FloydSteinberg,
            "bayer" => HalftoneSpec::Bayer {
                order: self.order.unwrap_or(8),
            },
            "cdot" => HalftoneSpec::ClusteredDot {
                order: self.order.unwrap_or(8),
            },
            "dotdif" => HalftoneSpec::DotDiffusion,
            "blockd" => HalftoneSpec::BlockD {
                h: self
                    .h
                    .ok_or_else(|| HalftoneError::InvalidParameter("blockd requires h".into()))?,
            },
            other => return Err(HalftoneError::UnknownAlgorithm(other.to_string())),
        };
        spec.validate()?;
        Ok(spec)
    }
}

fn check_level(level: f64) -> Result<(), HalftoneError> {
    if (0.0..=1.0).contains(&level) {
        Ok(())
    } else {
        Err(HalftoneError::InvalidParameter(format!(
            "level {level} outside [0, 1]"
        )))
    }
}

fn check_block(h: usize) -> Result<(), HalftoneError> {
    if h >= 1 {
        Ok(())
    } else {
        Err(HalftoneError::InvalidParameter("h must be >= 1".into()))
    }
}

fn check_order(order: usize, allowed: &[usize], what: &str) -> Result<(), HalftoneError> {
    if allowed.contains(&order) {
        Ok(())
    } else {
        Err(HalftoneError::InvalidParameter(format!(
            "{what} order {order} not in {allowed:?}"
        )))
    }
}

/// Halftones `img` with the algorithm described by `spec`.
pub fn halftone(img: &GrayImage, spec: &HalftoneSpec) -> Result<BinaryImage, HalftoneError> {
    spec.validate()?;
    Ok(match *spec {
        HalftoneSpec::Threshold { level } => halftone_threshold(img, level)?,
        HalftoneSpec::Random { seed } => halftone_random(img, seed),
        HalftoneSpec::FloydSteinberg => halftone_floyd_steinberg(img),
        HalftoneSpec::Bayer { order } => halftone_bayer(img, order)?,
        HalftoneSpec::ClusteredDot { order } => halftone_clustered_dot(img, order)?,
        HalftoneSpec::DotDiffusion => halftone_dot_diffusion(img),
        HalftoneSpec::BlockD { h } => halftone_block_d(img, h)?,
    })
}

/// Integer threshold `ceil(level * 256)`, so that `v < level * 256` for an
/// integer `v` is `v < threshold`.
pub(crate) fn level_threshold(level: f64) -> u16 {
    (level * 256.0).ceil().clamp(0.0, 256.0) as u16
}

/// Ink wherever `pixel < level * 256`.
pub fn halftone_threshold(img: &GrayImage, level: f64) -> Result<BinaryImage, HalftoneError> {
    check_level(level)?;
    let thr = level_threshold(level);
    let bits = img
        .pixels()
        .iter()
        .map(|&p| u8::from(u16::from(p) < thr))
        .collect();
    Ok(BinaryImage::from_bits_unchecked(
        img.width(),
        img.height(),
        bits,
    ))
}

pub fn halftone_floyd_steinberg(img: &GrayImage) -> BinaryImage {
    floyd_steinberg_with::<f64>(img)
}

pub fn halftone_dot_diffusion(img: &GrayImage) -> BinaryImage {
    dot_diffusion_with::<f64>(img)
}

/// Ink wherever a uniform draw in [0, 1) falls below the pixel's darkness.
/// One ChaCha8 stream, row-major.
pub fn halftone_random(img: &GrayImage, seed: u64) -> BinaryImage {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let bits = img
        .pixels()
        .iter()
        .map(|&p| {
            let u: f64 = rng.random();
            u8::from(u < crate::imagery::darkness(p))
        })
        .collect();
    BinaryImage::from_bits_unchecked(img.width(), img.height(), bits)
}

fn ordered(img: &GrayImage, screen: Screen) -> BinaryImage {
    // darkness > (index + 0.5) / n², cross-multiplied to stay in integers:
    // 2·n²·(255 − p) > 255·(2·index + 1)
    let n2 = (screen.order * screen.order) as u32;
    let w = img.width();
    let bits = img
        .pixels()
        .iter()
        .enumerate()
        .map(|(i, &p)| {
            let index = u32::from(screen.at(i / w, i % w));
            u8::from(2 * n2 * u32::from(255 - p) > 255 * (2 * index + 1))
        })
        .collect();
    BinaryImage::from_bits_unchecked(w, img.height(), bits)
}

pub fn halftone_bayer(img: &GrayImage, order: usize) -> Result<BinaryImage, HalftoneError> {
    let screen = screens::bayer(order).ok_or_else(|| {
        HalftoneError::InvalidParameter(format!("bayer order {order} not in [2, 4, 8]"))
    })?;
    Ok(ordered(img, screen))
}

pub fn halftone_clustered_dot(img: &GrayImage, order: usize) -> Result<BinaryImage, HalftoneError> {
    let screen = screens::clustered_dot(order).ok_or_else(|| {
        HalftoneError::InvalidParameter(format!("cdot order {order} not in [4, 8]"))
    })?;
    Ok(ordered(img, screen))
}

/// Block proxy: for each h×h tile (edge tiles at true size) place
/// `round(sum of darkness)` dots on the darkest pixels, ties row-major.
pub fn halftone_block_d(img: &GrayImage, h: usize) -> Result<BinaryImage, HalftoneError> {
    check_block(h)?;
    let (w, ht) = (img.width(), img.height());
    let mut bits = vec![0u8; w * ht];
    let mut tile: Vec<(u8, usize)> = Vec::with_capacity(h * h);
    for top in (0..ht).step_by(h) {
        for left in (0..w).step_by(h) {
            tile.clear();
            let mut dark_sum = 0u32;
            for row in top..(top + h).min(ht) {
                for col in left..(left + h).min(w) {
                    let i = row * w + col;
                    let p = img.pixels()[i];
                    dark_sum += u32::from(255 - p);
                    tile.push((p, i));
                }
            }
            // round(dark_sum / 255), half rounds up
            let k = ((2 * dark_sum + 255) / 510) as usize;
            tile.sort_unstable();
            for &(_, i) in tile.iter().take(k) {
                bits[i] = 1;
            }
        }
    }
    Ok(BinaryImage::from_bits_unchecked(w, ht, bits))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn all_specs() -> Vec<HalftoneSpec> {
        vec![
            HalftoneSpec::Threshold { level: 0.5 },
            HalftoneSpec::Random { seed: 3 },
            HalftoneSpec::FloydSteinberg,
            HalftoneSpec::Bayer { order: 2 },
            HalftoneSpec::Bayer { order: 8 },
            HalftoneSpec::ClusteredDot { order: 4 },
            HalftoneSpec::ClusteredDot { order: 8 },
            HalftoneSpec::DotDiffusion,
            HalftoneSpec::BlockD { h: 1 },
            HalftoneSpec::BlockD { h: 5 },
        ]
    }

    #[test]
    fn extremes_for_every_algorithm() {
        let black = GrayImage::filled(13, 11, 0);
        let white = GrayImage::filled(13, 11, 255);
        for spec in all_specs() {
            let out = halftone(&black, &spec).unwrap();
            assert_eq!(out, BinaryImage::ones(13, 11), "{spec}");
            let out = halftone(&white, &spec).unwrap();
            assert_eq!(out, BinaryImage::zeros(13, 11), "{spec}");
        }
    }

    #[test]
    fn ids_round_trip() {
        for spec in all_specs() {
            assert_eq!(spec.to_string().parse::<HalftoneSpec>().unwrap(), spec);
        }
    }

    #[test]
    fn parse_errors() {
        assert_eq!(
            "dither".parse::<HalftoneSpec>(),
            Err(HalftoneError::UnknownAlgorithm("dither".into()))
        );
        assert!(matches!(
            "blockd".parse::<HalftoneSpec>(),
            Err(HalftoneError::InvalidParameter(_))
        ));
        assert!(matches!(
            "fs:h=0".parse::<HalftoneSpec>(),
            Err(HalftoneError::InvalidParameter(_))
        ));
        assert!(matches!(
            "cdot:order=2".parse::<HalftoneSpec>(),
            Err(HalftoneError::InvalidParameter(_))
        ));
        assert!(matches!(
            "threshold:level=1.5".parse::<HalftoneSpec>(),
            Err(HalftoneError::InvalidParameter(_))
        ));
        assert!(halftone(
            &GrayImage::filled(2, 2, 0),
            &HalftoneSpec::Bayer { order: 3 }
        )
        .is_err());
    }

    #[test]
    fn threshold_rule() {
        let img = GrayImage::new(2, 1, vec![127, 128]).unwrap();
        assert_eq!(halftone_threshold(&img, 0.5).unwrap().bits(), &[1, 0]);
        let any = GrayImage::from_fn(16, 16, |r, c| (r * 16 + c) as u8);
        assert_eq!(
            halftone_threshold(&any, 0.0).unwrap(),
            BinaryImage::zeros(16, 16)
        );
        assert_eq!(
            halftone_threshold(&any, 1.0).unwrap(),
            BinaryImage::ones(16, 16)
        );
    }

    #[test]
    fn block_d_single_dark_pixel() {
        let img = GrayImage::new(2, 2, vec![0, 255, 255, 255]).unwrap();
        assert_eq!(halftone_block_d(&img, 2).unwrap().bits(), &[1, 0, 0, 0]);
        // ties go to the earliest pixel in row-major order
        let img = GrayImage::new(2, 2, vec![128, 128, 128, 128]).unwrap();
        let k = halftone_block_d(&img, 2).unwrap();
        assert_eq!(k.bits(), &[1, 1, 0, 0]);
    }

    #[test]
    fn block_d_h1_rounds_darkness() {
        let img = GrayImage::from_fn(16, 16, |r, c| (r * 16 + c) as u8);
        let out = halftone_block_d(&img, 1).unwrap();
        for (i, &p) in img.pixels().iter().enumerate() {
            let expect = crate::imagery::darkness(p) >= 0.5;
            assert_eq!(out.bits()[i] == 1, expect, "pixel {p}");
        }
    }

    #[test]
    fn cdot_mid_gray_fills_center_of_tile() {
        let img = GrayImage::filled(8, 8, 128);
        let out = halftone_clustered_dot(&img, 4).unwrap();
        let screen = screens::clustered_dot(4).unwrap();
        for r in 0..8 {
            for c in 0..8 {
                assert_eq!(out.get(r, c) == 1, screen.at(r, c) < 8);
            }
        }
        // the inked cells are no farther from the tile center than any blank cell
        let dist = |r: usize, c: usize| {
            let (dr, dc) = ((r % 4) as f64 - 1.5, (c % 4) as f64 - 1.5);
            dr * dr + dc * dc
        };
        let max_ink = (0..16)
            .filter(|i| out.get(i / 4, i % 4) == 1)
            .map(|i| dist(i / 4, i % 4))
            .fold(0.0, f64::max);
        let min_blank = (0..16)
            .filter(|i| out.get(i / 4, i % 4) == 0)
            .map(|i| dist(i / 4, i % 4))
            .fold(f64::INFINITY, f64::min);
        assert!(max_ink <= min_blank);
        assert_eq!(out.ones_count(), 32);
    }

    #[test]
    fn bayer_density_matches_threshold_count() {
        for order in [2usize, 4, 8] {
            let n2 = order * order;
            for p in (0..=255u8).step_by(5) {
                let img = GrayImage::filled(64, 64, p);
                let out = halftone_bayer(&img, order).unwrap();
                let d = crate::imagery::darkness(p);
                let expected = (d * n2 as f64 - 0.5).ceil().max(0.0) / n2 as f64;
                assert!(
                    (out.ink_density() - expected).abs() <= 1.0 / n2 as f64,
                    "order {order} p {p}"
                );
            }
        }
    }

    #[test]
    fn random_is_seeded() {
        let img = GrayImage::filled(32, 32, 100);
        assert_eq!(halftone_random(&img, 9), halftone_random(&img, 9));
        assert_ne!(halftone_random(&img, 9), halftone_random(&img, 10));
    }
}
