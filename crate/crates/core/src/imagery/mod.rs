//! Raster types, lightness conventions and netpbm I/O.
//!
//! Lightness follows the usual 8-bit convention: 0 is black, 255 is white.
//! Binary images store ink: a 1 bit is a printed (black) dot. This is the
//! same convention PBM uses, so binary images are written without inversion.

mod histogram;
mod pnm;

pub use histogram::{binary_histogram, block_lightness_histogram, Histogram};
pub use pnm::{
    decode_binary, decode_gray, encode_binary, encode_gray, read_binary, read_gray, write_binary,
    write_binary_as, write_gray, write_gray_as, PnmEncoding,
};

use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum ImageError {
    #[error("invalid dimensions {width}x{height}")]
    InvalidDimensions { width: usize, height: usize },
    #[error("expected {expected} samples, got {actual}")]
    LengthMismatch { expected: usize, actual: usize },
    #[error("bit value {0} at index {1} is not 0 or 1")]
    NotBinary(u8, usize),
    #[error("file not found: {}", .0.display())]
    NotFound(PathBuf),
    #[error("malformed header: {0}")]
    MalformedHeader(String),
    #[error("unsupported maxval {0} (only 255 is supported)")]
    UnsupportedMaxval(u32),
    #[error("truncated payload: expected {expected} samples, found {actual}")]
    Truncated { expected: usize, actual: usize },
    #[error("malformed payload: {0}")]
    MalformedPayload(String),
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("empty histogram")]
    EmptyHistogram,
    #[error("probabilities must be non-negative and sum to 1 (sum = {0})")]
    NotNormalized(f64),
    #[error("block size {block} exceeds both image dimensions {width}x{height}")]
    BlockTooLarge {
        block: usize,
        width: usize,
        height: usize,
    },
    #[error("invalid histogram parameters: {0}")]
    InvalidHistogram(String),
}

/// 8-bit single-channel raster, row-major.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct GrayImage {
    width: usize,
    height: usize,
    pixels: Vec<u8>,
}

impl GrayImage {
    pub fn new(width: usize, height: usize, pixels: Vec<u8>) -> Result<Self, ImageError> {
        check_dims(width, height)?;
        if pixels.len() != width * height {
            return Err(ImageError::LengthMismatch {
                expected: width * height,
                actual: pixels.len(),
            });
        }
        Ok(Self {
            width,
            height,
            pixels,
        })
    }

    /// Constant image. Panics on zero dimensions.
    pub fn filled(width: usize, height: usize, value: u8) -> Self {
        Self::new(width, height, vec![value; width * height]).expect("non-zero dimensions")
    }

    /// Builds an image from `f(row, col)`. Panics on zero dimensions.
    pub fn from_fn(width: usize, height: usize, mut f: impl FnMut(usize, usize) -> u8) -> Self {
        let mut pixels = Vec::with_capacity(width * height);
        for row in 0..height {
            for col in 0..width {
                pixels.push(f(row, col));
            }
        }
        Self::new(width, height, pixels).expect("non-zero dimensions")
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn len(&self) -> usize {
        self.pixels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pixels.is_empty()
    }

    pub fn pixels(&self) -> &[u8] {
        &self.pixels
    }

    pub fn get(&self, row: usize, col: usize) -> u8 {
        self.pixels[row * self.width + col]
    }

    /// Darkness in [0, 1]: `(255 - pixel) / 255`.
    pub fn darkness(&self, row: usize, col: usize) -> f64 {
        darkness(self.get(row, col))
    }

    /// Mean darkness over the whole image.
    pub fn mean_darkness(&self) -> f64 {
        self.pixels.iter().map(|&p| darkness(p)).sum::<f64>() / self.len() as f64
    }
}

/// Darkness of an 8-bit lightness value.
pub fn darkness(pixel: u8) -> f64 {
    f64::from(255 - pixel) / 255.0
}

/// {0,1} raster, row-major; 1 is an ink dot.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct BinaryImage {
    width: usize,
    height: usize,
    bits: Vec<u8>,
}

impl BinaryImage {
    pub fn new(width: usize, height: usize, bits: Vec<u8>) -> Result<Self, ImageError> {
        check_dims(width, height)?;
        if bits.len() != width * height {
            return Err(ImageError::LengthMismatch {
                expected: width * height,
                actual: bits.len(),
            });
        }
        if let Some(i) = bits.iter().position(|&b| b > 1) {
            return Err(ImageError::NotBinary(bits[i], i));
        }
        Ok(Self {
            width,
            height,
            bits,
        })
    }

    pub fn zeros(width: usize, height: usize) -> Self {
        Self::new(width, height, vec![0; width * height]).expect("non-zero dimensions")
    }

    pub fn ones(width: usize, height: usize) -> Self {
        Self::new(width, height, vec![1; width * height]).expect("non-zero dimensions")
    }

    pub fn from_fn(width: usize, height: usize, mut f: impl FnMut(usize, usize) -> bool) -> Self {
        let mut bits = Vec::with_capacity(width * height);
        for row in 0..height {
            for col in 0..width {
                bits.push(u8::from(f(row, col)));
            }
        }
        Self::new(width, height, bits).expect("non-zero dimensions")
    }

    /// Crate-internal constructor for buffers already known to hold 0/1.
    pub(crate) fn from_bits_unchecked(width: usize, height: usize, bits: Vec<u8>) -> Self {
        debug_assert_eq!(bits.len(), width * height);
        debug_assert!(bits.iter().all(|&b| b <= 1));
        Self {
            width,
            height,
            bits,
        }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }

    pub fn bits(&self) -> &[u8] {
        &self.bits
    }

    pub fn get(&self, row: usize, col: usize) -> u8 {
        self.bits[row * self.width + col]
    }

    pub fn same_dims(&self, other: &BinaryImage) -> bool {
        self.width == other.width && self.height == other.height
    }

    pub fn ones_count(&self) -> usize {
        self.bits.iter().filter(|&&b| b == 1).count()
    }

    /// Fraction of ink dots.
    pub fn ink_density(&self) -> f64 {
        self.ones_count() as f64 / self.len() as f64
    }

    pub fn complement(&self) -> BinaryImage {
        let bits = self.bits.iter().map(|&b| b ^ 1).collect();
        Self::from_bits_unchecked(self.width, self.height, bits)
    }
}

fn check_dims(width: usize, height: usize) -> Result<(), ImageError> {
    if width == 0 || height == 0 {
        return Err(ImageError::InvalidDimensions { width, height });
    }
    Ok(())
}
