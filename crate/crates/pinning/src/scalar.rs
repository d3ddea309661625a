//! Scalar abstraction for the continuum side of the crate.
//!
//! Profiles and PDE solvers are written against [`Real`], so they run in
//! `f32` or `f64`. Exact weights (partition functions, rates for the
//! detailed-balance oracle) use [`Weight`], which is also implemented by
//! `BigRational`.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, FromPrimitive, Num, NumCast};

/// floating point: f32 or f64
pub trait Real:
    Float + FromPrimitive + NumCast + Sum + Debug + Display + Default + Send + Sync + 'static
{
    /// Lossy conversion from an `f64` literal.
    #[inline]
    fn lit(v: f64) -> Self {
        <Self as NumCast>::from(v).expect("f64 literal representable")
    }

    #[inline]
    fn from_count(n: usize) -> Self {
        <Self as NumCast>::from(n).expect("usize representable")
    }

    #[inline]
    fn to_f64_lossy(self) -> f64 {
        <f64 as NumCast>::from(self).unwrap_or(f64::NAN)
    }
}

impl Real for f32 {}
impl Real for f64 {}

/// Exact or floating weights used by transfer-matrix sums and rate tables.
pub trait Weight: Num + Clone + PartialOrd + Debug {
    fn from_u32(n: u32) -> Self {
        let mut acc = Self::zero();
        for _ in 0..n {
            acc = acc + Self::one();
        }
        acc
    }
}

impl<T: Num + Clone + PartialOrd + Debug> Weight for T {}
