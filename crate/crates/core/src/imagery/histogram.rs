use super::{BinaryImage, ImageError};
use crate::scalar::Real;

/// Normalized lightness distribution.
///
/// Alongside the probabilities the histogram remembers how many samples it
/// was built from, so additive smoothing can work on count equivalents.
#[derive(Clone, Debug, PartialEq)]
pub struct Histogram<F> {
    bins: Vec<F>,
    samples: F,
}

impl<F: Real> Histogram<F> {
    /// Normalizes raw counts.
    ///
    /// Bin 0 is computed as the complement of the others, so a two-bin
    /// histogram sums to one exactly.
    pub fn from_counts(counts: &[usize]) -> Result<Self, ImageError> {
        if counts.len() < 2 {
            return Err(ImageError::InvalidHistogram(format!(
                "need at least 2 bins, got {}",
                counts.len()
            )));
        }
        let total: usize = counts.iter().sum();
        if total == 0 {
            return Err(ImageError::EmptyHistogram);
        }
        let n = F::of_count(total);
        let mut bins = vec![F::zero(); counts.len()];
        let mut rest = F::zero();
        for (p, &c) in bins.iter_mut().zip(counts).skip(1) {
            *p = F::of_count(c) / n;
            rest = rest + *p;
        }
        bins[0] = if counts[0] == 0 {
            F::zero()
        } else {
            (F::one() - rest).max(F::zero())
        };
        Ok(Self { bins, samples: n })
    }

    /// Wraps probabilities that already sum to one. The sample count is
    /// taken to be one.
    pub fn from_probabilities(bins: Vec<F>) -> Result<Self, ImageError> {
        Self::with_samples(bins, F::one())
    }

    pub fn with_samples(bins: Vec<F>, samples: F) -> Result<Self, ImageError> {
        if bins.len() < 2 {
            return Err(ImageError::InvalidHistogram(format!(
                "need at least 2 bins, got {}",
                bins.len()
            )));
        }
        if !samples.is_finite() || samples <= F::zero() {
            return Err(ImageError::InvalidHistogram(
                "sample count must be positive".into(),
            ));
        }
        let sum: F = bins.iter().copied().sum();
        let bad = bins.iter().any(|p| !p.is_finite() || *p < F::zero());
        if bad || (sum - F::one()).abs() > F::normalization_tolerance(bins.len()) {
            return Err(ImageError::NotNormalized(sum.as_f64()));
        }
        Ok(Self { bins, samples })
    }

    pub fn bins(&self) -> &[F] {
        &self.bins
    }

    pub fn bin_count(&self) -> usize {
        self.bins.len()
    }

    pub fn samples(&self) -> F {
        self.samples
    }
}

/// Two-bin histogram: `[p0, p1]` with p1 the ink density.
pub fn binary_histogram<F: Real>(img: &BinaryImage) -> Histogram<F> {
    let ones = img.ones_count();
    Histogram::from_counts(&[img.len() - ones, ones]).expect("image is non-empty")
}

/// Histogram of per-tile ink density.
///
/// The image is cut into `block`×`block` tiles (edge tiles keep their true,
/// smaller size), each tile's mean density lands in one of `bins` uniform
/// bins over [0, 1], and the tile counts are normalized.
pub fn block_lightness_histogram<F: Real>(
    img: &BinaryImage,
    block: usize,
    bins: usize,
) -> Result<Histogram<F>, ImageError> {
    if block == 0 {
        return Err(ImageError::InvalidHistogram("block must be >= 1".into()));
    }
    if bins < 2 {
        return Err(ImageError::InvalidHistogram("bins must be >= 2".into()));
    }
    let (w, h) = (img.width(), img.height());
    if block > w && block > h {
        return Err(ImageError::BlockTooLarge {
            block,
            width: w,
            height: h,
        });
    }
    let mut counts = vec![0usize; bins];
    for top in (0..h).step_by(block) {
        let bottom = (top + block).min(h);
        for left in (0..w).step_by(block) {
            let right = (left + block).min(w);
            let mut ones = 0usize;
            for row in top..bottom {
                ones += img.bits()[row * w + left..row * w + right]
                    .iter()
                    .map(|&b| b as usize)
                    .sum::<usize>();
            }
            let area = (bottom - top) * (right - left);
            // floor(ones / area * bins) in integer arithmetic; density 1 goes to the top bin.
            let bin = ((ones * bins) / area).min(bins - 1);
            counts[bin] += 1;
        }
    }
    Histogram::from_counts(&counts)
}
