//! Scalar abstraction shared by the numeric kernels.
//!
//! Geometry, the regression forest, the prediction metrics and the stop
//! objective are written against [`Scalar`] so they run on `f32` or `f64`.
//! Pipeline plumbing (logs, graphs, reports) is fixed to `f64`.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::float::TotalOrder;
use num_traits::{Float, FromPrimitive, NumCast};

/// floating point: f32 or f64
pub trait Scalar:
    Float + TotalOrder + FromPrimitive + NumCast + Debug + Display + Default + Sum + Send + Sync + 'static
{
    /// Converts an `f64` literal into the scalar type.
    fn lit(x: f64) -> Self {
        <Self as NumCast>::from(x).expect("f64 literal representable in scalar type")
    }

    fn count(n: usize) -> Self {
        <Self as FromPrimitive>::from_usize(n).expect("count representable in scalar type")
    }

    fn to_f64_lossy(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

impl Scalar for f32 {}
impl Scalar for f64 {}

/// Mean of a slice; `None` when empty.
pub fn mean<T: Scalar>(xs: &[T]) -> Option<T> {
    if xs.is_empty() {
        return None;
    }
    let total: T = xs.iter().copied().sum();
    Some(total / T::count(xs.len()))
}

/// Population standard deviation (ddof = 0); `None` when empty.
pub fn std_dev<T: Scalar>(xs: &[T]) -> Option<T> {
    let m = mean(xs)?;
    let ss: T = xs.iter().map(|&x| (x - m) * (x - m)).sum();
    Some((ss / T::count(xs.len())).sqrt())
}
