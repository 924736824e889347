//! Distortion and information measures, generic over the scalar type.
//!
//! All logarithms are base 2, so entropies and divergences are in bits.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use thiserror::Error;

use crate::channel::{derive_seed, gen_noise, NoisePower};
use crate::imagery::{
    binary_histogram, block_lightness_histogram, BinaryImage, GrayImage, Histogram, ImageError,
};
use crate::scalar::{plogp, Real};

#[derive(Debug, Error)]
pub enum MetricsError {
    #[error("dimension mismatch: {0}x{1} vs {2}x{3}")]
    DimensionMismatch(usize, usize, usize, usize),
    #[error("bin count mismatch: {0} vs {1}")]
    BinCountMismatch(usize, usize),
    #[error("smoothing strength must be positive and finite")]
    InvalidSmoothing,
    #[error("invalid histogram spec: {0}")]
    InvalidSpec(String),
    #[error("reps must be >= 1")]
    NoReps,
    #[error(transparent)]
    Histogram(#[from] ImageError),
}

/// Relative entropy in bits; may be `+inf` when supports do not nest.
#[derive(Clone, Copy, Debug, PartialEq, PartialOrd)]
pub struct Divergence<F>(F);

impl<F: Real> Divergence<F> {
    pub fn zero() -> Self {
        Self(F::zero())
    }

    pub fn infinite() -> Self {
        Self(F::infinity())
    }

    /// Negative round-off is clamped to zero.
    pub fn new(value: F) -> Self {
        Self(value.max(F::zero()))
    }

    pub fn value(self) -> F {
        self.0
    }

    pub fn is_infinite(self) -> bool {
        self.0.is_infinite()
    }
}

/// Formats as a plain number, or `inf`.
impl<F: Real> fmt::Display for Divergence<F> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_infinite() {
            f.write_str("inf")
        } else {
            write!(f, "{}", self.0)
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Smoothing<F> {
    None,
    /// Add λ to every bin's count equivalent, then renormalize.
    Additive(F),
}

impl<F: Real> Smoothing<F> {
    pub fn validate(self) -> Result<(), MetricsError> {
        match self {
            Self::Additive(l) if !(l > F::zero() && l.is_finite()) => {
                Err(MetricsError::InvalidSmoothing)
            }
            _ => Ok(()),
        }
    }
}

/// `none` or `additive:<λ>`.
impl<F: Real> FromStr for Smoothing<F> {
    type Err = MetricsError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        if s == "none" {
            return Ok(Self::None);
        }
        let lambda = s
            .strip_prefix("additive:")
            .and_then(|v| v.trim().parse::<f64>().ok())
            .ok_or_else(|| MetricsError::InvalidSpec(format!("bad smoothing '{s}'")))?;
        let out = Self::Additive(F::of(lambda));
        out.validate()?;
        Ok(out)
    }
}

impl<F: Real> fmt::Display for Smoothing<F> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::None => f.write_str("none"),
            Self::Additive(l) => write!(f, "additive:{l}"),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum HistogramMode {
    /// Two bins: blank and ink.
    Binary,
    /// Per-tile ink density binned uniformly over [0, 1].
    BlockLightness { block: usize, bins: usize },
}

/// `binary` or `block:<block>:<bins>`.
impl FromStr for HistogramMode {
    type Err = MetricsError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        if s == "binary" {
            return Ok(Self::Binary);
        }
        let bad = || MetricsError::InvalidSpec(format!("bad histogram mode '{s}'"));
        let rest = s.strip_prefix("block:").ok_or_else(bad)?;
        let (block, bins) = rest.split_once(':').ok_or_else(bad)?;
        let block: usize = block.trim().parse().map_err(|_| bad())?;
        let bins: usize = bins.trim().parse().map_err(|_| bad())?;
        if block == 0 || bins < 2 {
            return Err(bad());
        }
        Ok(Self::BlockLightness { block, bins })
    }
}

impl fmt::Display for HistogramMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Binary => f.write_str("binary"),
            Self::BlockLightness { block, bins } => write!(f, "block:{block}:{bins}"),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct HistogramSpec<F> {
    pub mode: HistogramMode,
    pub smoothing: Smoothing<F>,
}

impl<F: Real> HistogramSpec<F> {
    pub fn binary() -> Self {
        Self {
            mode: HistogramMode::Binary,
            smoothing: Smoothing::None,
        }
    }

    pub fn with_smoothing(mut self, smoothing: Smoothing<F>) -> Self {
        self.smoothing = smoothing;
        self
    }

    pub fn histogram(&self, img: &BinaryImage) -> Result<Histogram<F>, MetricsError> {
        Ok(match self.mode {
            HistogramMode::Binary => binary_histogram(img),
            HistogramMode::BlockLightness { block, bins } => {
                block_lightness_histogram(img, block, bins)?
            }
        })
    }
}

/// Row-major 8-bit raster usable by [`euclidean_distance`].
pub trait Raster {
    fn dims(&self) -> (usize, usize);
    fn samples(&self) -> &[u8];
}

impl Raster for BinaryImage {
    fn dims(&self) -> (usize, usize) {
        (self.width(), self.height())
    }

    fn samples(&self) -> &[u8] {
        self.bits()
    }
}

impl Raster for GrayImage {
    fn dims(&self) -> (usize, usize) {
        (self.width(), self.height())
    }

    fn samples(&self) -> &[u8] {
        self.pixels()
    }
}

/// Root-mean-square difference `sqrt((1/n) Σ (a - b)²)` over raw sample
/// values. For binary images this is the square root of the fraction of
/// differing pixels.
pub fn euclidean_distance<F: Real, R: Raster>(a: &R, b: &R) -> Result<F, MetricsError> {
    let (da, db) = (a.dims(), b.dims());
    if da != db {
        return Err(MetricsError::DimensionMismatch(da.0, da.1, db.0, db.1));
    }
    let sum: u64 = a
        .samples()
        .iter()
        .zip(b.samples())
        .map(|(&x, &y)| {
            let d = u64::from(x.abs_diff(y));
            d * d
        })
        .sum();
    let n = a.samples().len();
    Ok((F::of(sum as f64) / F::of_count(n)).sqrt())
}

fn smoothed<F: Real>(h: &Histogram<F>, lambda: F) -> Vec<F> {
    let n = h.samples();
    let denom = n + lambda * F::of_count(h.bin_count());
    h.bins().iter().map(|&p| (p * n + lambda) / denom).collect()
}

/// `Q(p‖q) = Σ p[i] (log2 p[i] − log2 q[i])`, with `0·log 0 = 0`.
///
/// Without smoothing, a bin with `p > 0` and `q = 0` yields `+inf`.
pub fn relative_entropy<F: Real>(
    p: &Histogram<F>,
    q: &Histogram<F>,
    smoothing: Smoothing<F>,
) -> Result<Divergence<F>, MetricsError> {
    if p.bin_count() != q.bin_count() {
        return Err(MetricsError::BinCountMismatch(p.bin_count(), q.bin_count()));
    }
    smoothing.validate()?;
    let (pb, qb) = match smoothing {
        Smoothing::None => (p.bins().to_vec(), q.bins().to_vec()),
        Smoothing::Additive(l) => (smoothed(p, l), smoothed(q, l)),
    };
    let mut sum = F::zero();
    for (&pi, &qi) in pb.iter().zip(&qb) {
        if pi > F::zero() {
            if qi <= F::zero() {
                return Ok(Divergence::infinite());
            }
            sum = sum + pi * (pi.log2() - qi.log2());
        }
    }
    Ok(Divergence::new(sum))
}

/// Relative entropy between the histograms of two binary images. The
/// images may differ in size.
pub fn image_relative_entropy<F: Real>(
    a: &BinaryImage,
    b: &BinaryImage,
    spec: &HistogramSpec<F>,
) -> Result<Divergence<F>, MetricsError> {
    let pa = spec.histogram(a)?;
    let pb = spec.histogram(b)?;
    relative_entropy(&pa, &pb, spec.smoothing)
}

/// Shannon entropy of the ink/blank split, in bits.
pub fn binary_entropy<F: Real>(img: &BinaryImage) -> F {
    let h = binary_histogram::<F>(img);
    // 0 - sum rather than -sum: a certain outcome reports +0, not -0.
    F::zero() - h.bins().iter().map(|&p| plogp(p)).sum::<F>()
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EntropyPoint<F> {
    pub t: f64,
    pub mean: F,
    pub std: F,
    pub reps: usize,
}

/// Mean and sample standard deviation (n − 1); std is 0 for one value.
pub(crate) fn mean_std<F: Real>(values: &[F]) -> (F, F) {
    let n = F::of_count(values.len());
    let mean = values.iter().copied().sum::<F>() / n;
    if values.len() < 2 {
        return (mean, F::zero());
    }
    let var = values.iter().map(|&v| (v - mean) * (v - mean)).sum::<F>() / (n - F::one());
    (mean, var.sqrt())
}

/// Entropy of threshold noise fields averaged over `reps` realizations per
/// power. Cell `(i, rep)` uses seed `derive_seed(seed, i * reps + rep)`, so
/// the result does not depend on how rayon schedules the cells.
pub fn noise_entropy_curve<F: Real>(
    width: usize,
    height: usize,
    t_grid: &[NoisePower],
    reps: usize,
    seed: u64,
) -> Result<Vec<EntropyPoint<F>>, MetricsError> {
    if reps == 0 {
        return Err(MetricsError::NoReps);
    }
    let entropies: Vec<F> = (0..t_grid.len() * reps)
        .into_par_iter()
        .map(|cell| {
            let power = t_grid[cell / reps];
            let v = gen_noise(width, height, power, derive_seed(seed, cell as u64));
            binary_entropy::<F>(&v)
        })
        .collect();
    Ok(t_grid
        .iter()
        .zip(entropies.chunks_exact(reps))
        .map(|(t, chunk)| {
            let (mean, std) = mean_std(chunk);
            EntropyPoint {
                t: t.t(),
                mean,
                std,
                reps,
            }
        })
        .collect())
}
