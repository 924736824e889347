//! Scalar abstraction shared by the information measures.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, FromPrimitive, ToPrimitive};

/// Floating-point scalar used by histograms, entropies and divergences.
///
/// Implemented for `f32` and `f64`. Anything satisfying the bounds gets it
/// through the blanket impl.
pub trait Real:
    Float + FromPrimitive + ToPrimitive + Sum + Debug + Display + Default + Send + Sync + 'static
{
    /// Lossy conversion from `f64`.
    fn of(v: f64) -> Self {
        Self::from_f64(v).expect("f64 is representable by every Real")
    }

    /// Conversion from a pixel or bin count.
    fn of_count(n: usize) -> Self {
        Self::from_usize(n).expect("count is representable by every Real")
    }

    fn as_f64(self) -> f64 {
        self.to_f64().expect("Real converts to f64")
    }

    /// Tolerance used when checking that probabilities sum to one.
    ///
    /// 1e-12 for `f64`; widened for narrower types where 1e-12 is below
    /// the rounding error of a modest sum.
    fn normalization_tolerance(bins: usize) -> Self {
        let rounding = Self::epsilon() * Self::of_count(64 * bins.max(1));
        rounding.max(Self::of(1e-12))
    }
}

impl<T> Real for T where
    T: Float
        + FromPrimitive
        + ToPrimitive
        + Sum
        + Debug
        + Display
        + Default
        + Send
        + Sync
        + 'static
{
}

/// `p * log2(p)` with the convention `0 * log2(0) = 0`.
pub(crate) fn plogp<F: Real>(p: F) -> F {
    if p > F::zero() {
        p * p.log2()
    } else {
        F::zero()
    }
}
